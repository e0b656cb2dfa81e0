import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hyperloss import cli, closedform, selftest
from hyperloss.network import dump_spec, mz_network
from hyperloss.scenarios import experiment_hyperloss_network

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "text, value",
    [
        ("pi", np.pi),
        ("pi/2", np.pi / 2),
        ("-pi/4", -np.pi / 4),
        ("2pi", 2 * np.pi),
        ("3*pi/2", 1.5 * np.pi),
        ("0.5", 0.5),
        ("-1e-3", -1e-3),
    ],
)
def test_parse_angle(text, value):
    assert cli.parse_angle(text) == pytest.approx(value, abs=1e-15)


def test_parse_angle_rejects_garbage():
    import argparse

    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_angle("tau")


def test_coldloss(capsys):
    code, out, _ = run(["coldloss", "--eps1", "0.08", "--eps2", "0.08", "--phi", "0"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "lambda = 0.2944"
    assert "small-k lambda = 0.3200" in out


def test_mz_recovery_line(capsys):
    code, out, _ = run(["mz", "--eps1", "0.08", "--eps2", "0.08", "--phi", "pi", "--sqz-db", "15"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "V_min = 15.00 dB"


def test_mz_hyperloss_line(capsys):
    code, out, _ = run(
        ["mz", "--eps1", "0.08", "--eps2", "0.08", "--phi", "pi/2", "--r", str(np.log(340) / 2)], capsys
    )
    assert code == 0
    assert out.startswith("hyperloss detected at phi=1.571, V_min=+3.7 dB above shot noise")


def test_chain_report(capsys, tmp_path):
    out_path = tmp_path / "chain.json"
    code, out, _ = run(
        ["chain", "--nodes", "10", "--eps", "0.01", "--sqz-db", "15", "--phi-sweep", "720",
         "--threshold-db", "10", "--format", "json", "--output", str(out_path)],
        capsys,
    )
    assert code == 0
    assert "fraction below 10 dB = 0.5625" in out
    assert "incoherent baseline" in out and "9.06 dB" in out
    assert "10.2 dB" in out
    assert out.count("convention hom_policy=") == 4
    data = json.loads(out_path.read_text())
    assert data["fraction_below"] == pytest.approx(0.5625)
    assert data["config"]["spec"]["n_nodes"] == 10


def test_selftest_passes(capsys):
    code, out, _ = run(["selftest"], capsys)
    assert code == 0
    assert out.count("PASS") == 4
    assert "tol=" in out


def test_selftest_detects_corrupted_formula(capsys, monkeypatch):
    original = closedform.hot_variance

    def corrupted(p):
        return original(p) * (1 + 1e-6)

    monkeypatch.setattr(closedform, "hot_variance", corrupted)
    code, out, _ = run(["selftest"], capsys)
    assert code != 0
    line = next(l for l in out.splitlines() if "oracle" in l)
    assert line.startswith("FAIL")


def test_sweep_csv_header_and_columns(capsys, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, out, _ = run(
        ["sweep", str(CONFIGS / "mz_experiment.json"), "--phi-points", "8", "--output", str(out_path)], capsys
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "# schema: 1"
    assert "below shot noise" in lines[1]
    config = json.loads(lines[2][len("# config: "):])
    assert config["spec"]["external_loss"] == 0.263
    header = next(l for l in lines if not l.startswith("#"))
    assert header.split(",")[:7] == [
        "phi_rad", "omega_hz", "eps", "v_min_rel_shot", "v_max_rel_shot", "v_sqz_quad_rel_shot", "squeezing_db",
    ]
    assert len([l for l in lines if not l.startswith("#")]) == 9


def test_sweep_override_is_recorded(capsys, tmp_path):
    out_path = tmp_path / "sweep.json"
    code, _, _ = run(
        ["sweep", str(CONFIGS / "mz_experiment.json"), "--phi-points", "4", "--format", "json",
         "--set", "external_loss=0.1", "--set", "components.0.epsilon=0.05", "--output", str(out_path)],
        capsys,
    )
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["config"]["spec"]["external_loss"] == 0.1
    assert data["config"]["spec"]["components"][0]["epsilon"] == 0.05


def test_mismatch_sweep_cli(capsys, tmp_path):
    out_path = tmp_path / "eps.csv"
    code, _, _ = run(
        ["sweep", str(CONFIGS / "mz_experiment.json"), "--eps-grid", "0,0.04,0.08", "--phi", "pi/2",
         "--output", str(out_path)],
        capsys,
    )
    assert code == 0
    rows = [l.split(",") for l in out_path.read_text().splitlines() if not l.startswith("#")][1:]
    assert [float(r[2]) for r in rows] == [0.0, 0.04, 0.08]


def test_optimize_cli(capsys):
    code, out, _ = run(["optimize", str(CONFIGS / "chain_eps001.json"), "--grid-density", "16"], capsys)
    assert code == 0
    assert out.startswith("optimum squeezing = 15.0000 dB")


def test_map_cli_reports_hyperloss(capsys, tmp_path):
    out_path = tmp_path / "map.csv"
    code, out, _ = run(
        ["map", str(CONFIGS / "two_cavity_hyperloss.json"), "--phi-points", "24", "--output", str(out_path)],
        capsys,
    )
    assert code == 0
    assert "hyperloss detected" in out
    assert out_path.read_text().splitlines()[3] == "phi_rad,omega_hz,v_min_rel_shot,squeezing_db"


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "/nonexistent/spec.json"],
        ["sweep", "CONFIG", "--set", "input.rr=1"],
        ["sweep", "CONFIG", "--set", "nonsense"],
        ["mz", "--eps1", "1.5", "--eps2", "0", "--phi", "0"],
        ["coldloss", "--eps1", "0.1"],
        ["nonexistent-command"],
        ["optimize", "CONFIG", "--free", "0"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    argv = [str(CONFIGS / "mz_experiment.json") if a == "CONFIG" else a for a in argv]
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err


def test_malformed_spec_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": 1,\n "type": "network",\n "modes": [}\n')
    code, _, err = run(["sweep", str(bad)], capsys)
    assert code == 2
    assert "line 3" in err


def test_bad_field_reports_field(capsys, tmp_path):
    data = mz_network(0.1, 0.1, 0.0).to_dict()
    data["components"][1]["phase"] = 1.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run(["sweep", str(path)], capsys)
    assert code == 2
    assert "phase" in err


def test_overflow_exits_3(capsys):
    code, _, err = run(["mz", "--eps1", "0.08", "--eps2", "0.08", "--phi", "pi/2", "--r", "400"], capsys)
    assert code == 3
    assert "non-physical" in err


def _outputs(cmd_sets, tmp_path, tag):
    paths = []
    for i, argv in enumerate(cmd_sets):
        p = tmp_path / f"{tag}{i}"
        assert cli.main(argv + ["--output", str(p)]) == 0
        paths.append(p.read_bytes())
    return paths


def test_byte_identical_outputs(tmp_path, capsys):
    spec = tmp_path / "hl.json"
    dump_spec(experiment_hyperloss_network(), spec)
    cmds = [
        ["sweep", str(CONFIGS / "mz_experiment.json"), "--phi-points", "16"],
        ["sweep", str(CONFIGS / "mz_experiment.json"), "--phi-points", "16", "--format", "json"],
        ["map", str(spec), "--phi-points", "6", "--set", "external_loss=0.3"],
        ["chain", "--nodes", "10", "--eps", "0.02", "--sqz-db", "15", "--phi-sweep", "36"],
        ["optimize", str(CONFIGS / "mz_experiment.json"), "--sigma", "0.1", "--samples", "20"],
        ["mz", "--eps1", "0.08", "--eps2", "0.08", "--phi", "pi/2", "--sqz-db", "10"],
    ]
    first = _outputs(cmds, tmp_path, "a")
    second = _outputs(cmds, tmp_path, "b")
    capsys.readouterr()
    assert first == second


def test_thread_count_does_not_change_output(tmp_path, monkeypatch, capsys):
    cmd = ["sweep", str(CONFIGS / "two_cavity_hyperloss.json"), "--phi-points", "12", "--omega-hz", "3.75e6"]
    monkeypatch.setenv("HYPERLOSS_THREADS", "1")
    (a,) = _outputs([cmd], tmp_path, "one")
    monkeypatch.setenv("HYPERLOSS_THREADS", "4")
    (b,) = _outputs([cmd], tmp_path, "four")
    capsys.readouterr()
    assert a == b


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hyperloss", "coldloss", "--eps1", "0.08", "--eps2", "0.08",
                           "--phi", "pi"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("lambda = 0.0000")


def test_selftest_check_lines():
    checks = selftest.run_checks()
    assert all(c.passed for c in checks)
    assert [c.tolerance for c in checks] == [1e-10, 1e-12, 1e-12, 1e-12]
