import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperloss import closedform as cf
from hyperloss import gaussian as g
from hyperloss import network as nw
from hyperloss.components import Cavity, Coupler, Gouy, Loss, Phase
from hyperloss.errors import ConfigError
from hyperloss.network import ChainSpec, InputSpec, ModeSpec, NetworkSpec

from conftest import R15, V15

TWO_MODES = (ModeSpec("FM", 0), ModeSpec("HOM", 1))


def net_of(components, r=R15, **kw):
    return NetworkSpec(TWO_MODES, components, "FM", InputSpec("FM", r), **kw)


def test_empty_network_passthrough():
    h = nw.evaluate_homodyne(net_of(()))
    assert h.v_min == pytest.approx(V15, rel=1e-12)


def test_zero_detuned_cavities_at_dc_are_transparent():
    net = net_of((Cavity(0.0, 1.0, "FM"), Cavity(0.0, 3.0, "FM")))
    assert nw.evaluate_homodyne(net, 0.0).v_min == pytest.approx(V15, rel=1e-12)


def test_unknown_mode_label_rejected():
    with pytest.raises(ConfigError):
        net_of((Phase(1.0, "LG10"),))
    with pytest.raises(ConfigError):
        NetworkSpec(TWO_MODES, (), "LG10", InputSpec("FM", 0.0))


def test_external_loss_bounds():
    with pytest.raises(ConfigError):
        net_of((), external_loss=1.5)


def test_external_loss_applied_at_readout():
    v = nw.readout_variance(net_of((), external_loss=0.263))
    assert v == pytest.approx(0.737 * V15 + 0.263, abs=1e-14)


def test_mz_matches_closed_form_on_grid():
    for e1 in (0, 0.01, 0.05, 0.08, 0.2):
        for e2 in (0, 0.01, 0.05, 0.08, 0.2):
            for phi in np.arange(17) * np.pi / 8:
                for r in (0, 0.5, 1, 1.5):
                    v = nw.readout_variance(nw.mz_network(e1, e2, phi, r), 0.0, "squeezed")
                    assert abs(v - cf.hot_variance(cf.MzParams(e1, e2, phi, r))) < 1e-10


def test_gouy_network_reduces_to_closed_form():
    # a Gouy segment of order 1 is the same HOM rotation
    for psi in (0.3, 1.9, np.pi):
        net = net_of((Coupler(0.05, ("FM", "HOM")), Gouy(psi, 1, "HOM"), Coupler(0.08, ("FM", "HOM"))), r=1.0)
        assert nw.readout_variance(net, 0.0, "squeezed") == pytest.approx(
            cf.hot_variance(cf.MzParams(0.05, 0.08, psi, 1.0)), abs=1e-12
        )


def test_homodyne_spectrum_flat_network_constant():
    net = nw.mz_network(0.08, 0.08, 1.0, r=1.0)
    net = NetworkSpec(net.modes, net.components, "FM", net.input, frequency_grid=(0.0, 1e3, 1e6, 1e9))
    vals = [h.v_min for h in nw.homodyne_spectrum(net)]
    assert np.ptp(vals) < 1e-14


def test_homodyne_spectrum_vacuum_is_shot_noise():
    net = net_of((Coupler(0.1, ("FM", "HOM")), Cavity(0.3, 1.0, "FM"), Coupler(0.1, ("FM", "HOM"))),
                 r=0.0, frequency_grid=tuple(np.linspace(0, 5, 11)))
    for h in nw.homodyne_spectrum(net):
        assert h.v_min == pytest.approx(1.0, abs=1e-12)
        assert h.v_max == pytest.approx(1.0, abs=1e-12)


def test_cavity_mz_spectrum_varies_and_reaches_nonresonant_limit():
    comps = (Coupler(0.08, ("FM", "HOM")), Cavity(0.0, 1.0, "FM"), Coupler(0.08, ("FM", "HOM")))
    net = net_of(comps, r=1.5, frequency_grid=(0.0, 0.5, 1.0, 2.0))
    vals = [h.v_min for h in nw.homodyne_spectrum(net)]
    assert np.ptp(vals) > 1e-3
    far = nw.evaluate_homodyne(net, 1e7).v_min
    limit = nw.evaluate_homodyne(net.with_component(1, Cavity(0.0, 1.0, "FM", resonant=False)), 0.0).v_min
    assert far == pytest.approx(limit, abs=1e-6)


def test_cold_throughput_examples():
    assert nw.cold_throughput(nw.mz_network(0.08, 0.08, np.pi)) == pytest.approx(0.0, abs=1e-15)
    assert nw.cold_throughput(nw.mz_network(0.08, 0.08, 0.0)) == pytest.approx(cf.cold_loss_exact(0.08, 0.08, 0.0), abs=1e-14)
    assert nw.cold_throughput(net_of((Phase(1.0, "HOM"), Cavity(0.0, 1.0, "FM")))) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 0.95), st.floats(0, 0.95), st.floats(-7, 7), st.floats(0, 1), st.floats(-5, 5))
def test_cold_throughput_in_unit_interval(e1, e2, phi, lam, delta):
    comps = (Coupler(e1, ("FM", "HOM")), Cavity(delta, 1.0, "FM"), Phase(phi, "HOM"),
             Loss(lam, "HOM"), Coupler(e2, ("FM", "HOM")))
    val = nw.cold_throughput(net_of(comps, external_loss=lam / 2))
    assert 0.0 <= val <= 1.0


def test_chain_two_nodes_reduces_to_mz():
    for phi in (0.0, 0.7, np.pi / 2, 2.2):
        c = ChainSpec(2, 0.05, phi, 1.0)
        expected = cf.hot_variance(cf.MzParams(0.05, 0.05, phi, 1.0))
        assert nw.chain_variance(c) == pytest.approx(expected, abs=1e-12)


def test_chain_zero_mismatch_keeps_input():
    for policy in nw.HOM_POLICIES:
        assert nw.chain_evaluate(ChainSpec(10, 0.0, 1.3, R15, policy)) == pytest.approx(15.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 6, 10])
def test_chain_even_pi_full_recovery(n):
    assert nw.chain_evaluate(ChainSpec(n, 0.08, np.pi, R15)) == pytest.approx(15.0, abs=1e-10)


def test_chain_envelope_around_baseline():
    grid = np.arange(360) * 2 * np.pi / 360
    db = np.array([nw.chain_evaluate(ChainSpec(10, 0.01, p, R15)) for p in grid])
    base = nw.incoherent_baseline(10, 0.01, R15)
    assert db.max() >= base
    assert db.min() < base


@pytest.mark.parametrize("phi", [0.0, np.pi, 1.234])
def test_refreshed_chain_equals_incoherent_baseline(phi):
    c = ChainSpec(10, 0.01, phi, R15, "refreshed")
    assert nw.chain_evaluate(c) == pytest.approx(nw.incoherent_baseline(10, 0.01, R15), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.floats(0, 0.5), st.floats(-7, 7), st.floats(0, 2))
def test_phase_position_orderings_agree_in_fm(n, e, phi, r):
    # the HOM phase commutes with everything the FM readout sees up to a relabelling of the HOM quadratures
    a = nw.chain_variance(ChainSpec(n, e, phi, r, phase_position="after"))
    b = nw.chain_variance(ChainSpec(n, e, phi, r, phase_position="before"))
    assert a == pytest.approx(b, abs=1e-10 * max(1.0, np.exp(2 * r)))


def test_incoherent_baseline_values():
    assert nw.incoherent_baseline(10, 0.01, R15) == pytest.approx(9.06, abs=0.005)
    lam = 1 - 0.99**10
    assert nw.incoherent_baseline(10, 0.01, R15) == pytest.approx(-10 * np.log10((1 - lam) * V15 + lam), abs=1e-12)
    assert nw.incoherent_baseline(0, 0.01, R15) == pytest.approx(15.0)
    assert nw.incoherent_baseline(10, 0.0, R15) == pytest.approx(15.0)


def test_chain_spec_validation():
    with pytest.raises(ConfigError):
        ChainSpec(3, 1.0)
    with pytest.raises(ConfigError):
        ChainSpec(3, 0.1, (0.0, 1.0))
    with pytest.raises(ConfigError):
        ChainSpec(3, 0.1, hom_policy="fresh")


def test_chain_per_node_phases():
    c = ChainSpec(3, 0.05, (0.1, 0.2, 0.3), 0.5)
    assert c.node_phases() == (0.1, 0.2, 0.3)
    assert len(c.to_network().components) == 6


def test_differential_phase_mz():
    net = nw.mz_network(0.08, 0.08, 1.1)
    assert net.differential_phase() == pytest.approx(1.1)
    assert net.with_differential_phase(2.5).differential_phase() == pytest.approx(2.5)


def test_differential_phase_counts_cavity_carrier_phases():
    c1 = Cavity(0.0, 2.0, "FM").with_carrier_phase(0.4)
    comps = (Coupler(0.08, ("FM", "HOM")), c1, Cavity(0.0, 2.0, "HOM", resonant=False),
             Phase(0.3, "HOM"), Coupler(0.08, ("FM", "HOM")))
    net = net_of(comps, sweep_component=3)
    assert net.differential_phase() == pytest.approx(np.pi + 0.3 - 0.4)
    assert net.with_differential_phase(1.0).differential_phase() == pytest.approx(1.0)


def test_dc_network_depends_only_on_differential_phase():
    # at DC a detuned FM cavity is just a carrier phase, so only the FM-HOM difference matters
    c1 = Cavity(0.0, 2.0, "FM").with_carrier_phase(0.4)
    comps = (Coupler(0.08, ("FM", "HOM")), c1, Phase(0.3, "HOM"), Coupler(0.08, ("FM", "HOM")))
    net = net_of(comps, r=1.2, sweep_component=2)
    mz = nw.mz_network(0.08, 0.08, 0.3 - 0.4, r=1.2)
    assert nw.evaluate_homodyne(net).v_min == pytest.approx(nw.evaluate_homodyne(mz).v_min, abs=1e-12)


def test_geometric_mismatch():
    assert nw.mz_network(0.08, 0.08, 0.0).geometric_mismatch() == pytest.approx(1 - 0.92**2)


def test_default_frequency_grid():
    grid = nw.default_frequency_grid()
    assert len(grid) == 201
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(2 * np.pi * 1e7)


def test_network_serialization_roundtrip(tmp_path):
    comps = (Coupler(0.08, ("FM", "HOM")), Cavity(0.2, 1.0, "FM"), Gouy(0.5, 2, "HOM"),
             Phase(0.3, "HOM"), Loss(0.1, "HOM"), Coupler(0.05, ("FM", "HOM")))
    net = net_of(comps, external_loss=0.2, frequency_grid=(0.0, 1.0), sweep_component=3, name="x")
    path = tmp_path / "net.json"
    nw.dump_spec(net, path)
    assert nw.load_spec(path) == net
    chain = ChainSpec(4, 0.02, (0.0, 1.0, 2.0, 3.0), 1.0, "refreshed", "before", "optimal")
    nw.dump_spec(chain, path)
    assert nw.load_spec(path) == chain


def test_frequency_grid_shorthand():
    data = nw.mz_network(0.1, 0.1, 0.0).to_dict()
    data["frequency_grid"] = {"start": 0, "stop": 10e6, "num": 3, "unit": "Hz"}
    net = nw.spec_from_dict(data)
    assert net.frequency_grid == pytest.approx((0.0, 2 * np.pi * 5e6, 2 * np.pi * 10e6))


def test_chain_accepts_sqz_db():
    c = nw.spec_from_dict({"schema": 1, "type": "chain", "n_nodes": 10, "eps": 0.01, "sqz_db": 15})
    assert c.r_in == pytest.approx(R15)


@pytest.mark.parametrize(
    "patch",
    [
        {"schema": 2},
        {"type": "tree"},
        {"colour": "red"},
        {"readout_mode": "LG10"},
        {"components": [{"kind": "mirror"}]},
    ],
)
def test_spec_errors(patch):
    data = nw.mz_network(0.1, 0.1, 0.0).to_dict()
    data.update(patch)
    with pytest.raises(ConfigError):
        nw.spec_from_dict(data)


def test_load_spec_reports_json_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "schema": 1,\n  "type": "chain"\n  "eps": 0.1\n}\n')
    with pytest.raises(ConfigError, match="line 4"):
        nw.load_spec(path)
