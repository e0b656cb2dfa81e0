"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 non-physical state.
"""

from __future__ import annotations

import argparse
import copy
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import analysis, closedform, gaussian, network, output, selftest
from .errors import BudgetExceeded, ConfigError, InvalidArgument, InvalidProblem, InvalidState
from .network import ChainSpec, NetworkSpec
from .optimizer import OptProblem, optimize_phases, robustness
from .scenarios import QUOTED_BASELINE_DB

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 2, 3

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*(?:e[+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(text: str) -> float:
    """Parse radians, accepting ``pi`` tokens such as ``pi``, ``-pi/2`` or ``3*pi/4``."""
    text = str(text).strip().lower()
    m = _ANGLE.match(text)
    if m:
        coef = m.group(1)
        if coef in (None, "", "+"):
            factor = 1.0
        elif coef == "-":
            factor = -1.0
        else:
            factor = float(coef)
        denom = float(m.group(2)) if m.group(2) else 1.0
        return factor * np.pi / denom
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return parse_angle(text)
    except argparse.ArgumentTypeError:
        return text


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key.path=value`` overrides; every key must already exist."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = data
        for depth, part in enumerate(parts):
            last = depth == len(parts) - 1
            if isinstance(node, list):
                try:
                    idx = int(part)
                    node[idx]
                except (ValueError, IndexError):
                    raise ConfigError(f"override {key!r}: no element {part!r}") from None
                if last:
                    node[idx] = _parse_value(raw)
                else:
                    node = node[idx]
            elif isinstance(node, dict):
                if part not in node:
                    raise ConfigError(f"override {key!r}: unknown key {part!r}")
                if last:
                    node[part] = _parse_value(raw)
                else:
                    node = node[part]
            else:
                raise ConfigError(f"override {key!r}: cannot descend into {part!r}")
    return data


def load_config(path, overrides=()):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    data = apply_overrides(data, overrides)
    try:
        spec = network.spec_from_dict(data)
    except (ConfigError, InvalidArgument) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return spec, spec.to_dict()


def _emit(args, text: str) -> None:
    if args.output:
        output.write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def _summary_line(v: float, phi: float | None = None) -> str:
    if v > 1.0 + analysis.GUARD:
        where = f" at phi={phi:.3f}" if phi is not None else ""
        return f"hyperloss detected{where}, V_min=+{10 * np.log10(v):.1f} dB above shot noise"
    return f"V_min = {gaussian.variance_to_db(v):.2f} dB"


def _check_sweep_physical(v_min, v_max) -> None:
    prod = np.asarray(v_min) * np.asarray(v_max)
    if not np.all(np.isfinite(prod)) or np.any(np.asarray(v_min) <= 0):
        raise InvalidState("non-finite or non-positive variance encountered")
    if np.any(prod < 1.0 - gaussian.PHYSICAL_TOL):
        raise InvalidState(f"uncertainty relation violated (min V_min*V_max = {prod.min():.6g})")


def _input_r(args) -> float:
    if args.r is not None:
        return args.r
    return gaussian.db_to_r(args.sqz_db)


# ---------------------------------------------------------------- commands


def cmd_coldloss(args) -> int:
    exact = closedform.cold_loss_exact(args.eps1, args.eps2, args.phi)
    small = closedform.cold_loss_smallk(args.eps1, args.eps2, args.phi)
    incoherent = 1.0 - (1.0 - args.eps1) * (1.0 - args.eps2)
    print(f"lambda = {exact:.4f}")
    print(f"small-k lambda = {small:.4f}; incoherent lambda = {incoherent:.4f}")
    if args.output:
        output.write_atomic(
            args.output,
            output.dumps(
                {
                    "schema": network.SCHEMA_VERSION,
                    "config": {"command": "coldloss", "eps1": args.eps1, "eps2": args.eps2, "phi": args.phi},
                    "lambda_exact": exact,
                    "lambda_smallk": small,
                    "lambda_incoherent": incoherent,
                }
            ),
        )
    return EXIT_OK


def cmd_mz(args) -> int:
    r = _input_r(args)
    params = closedform.MzParams(args.eps1, args.eps2, args.phi, r)
    net = network.mz_network(args.eps1, args.eps2, args.phi, r=r, external_loss=args.external_loss)
    state = network.evaluate(net)
    gaussian.check_physical(state)
    hom = gaussian.min_max_variance(state, net.readout_index)
    v_sq = gaussian.quadrature_variance(state, net.readout_index, 0.0)
    v = v_sq if args.readout == "squeezed" else hom.v_min
    print(_summary_line(v, args.phi))
    ch = closedform.effective_channel(params)
    print(
        f"squeezed-quadrature V = {v_sq:.6g}; optimal-angle V_min = {hom.v_min:.6g}, "
        f"V_max = {hom.v_max:.6g}; cold loss = {network.cold_throughput(net):.4f}; "
        f"weak-coupling lambda_smm = {ch.lambda_smm:.4f}, T = {ch.T:.4g}"
    )
    if args.output:
        config = {"command": "mz", "readout": args.readout, "spec": net.to_dict()}
        output.write_atomic(
            args.output,
            output.dumps(
                {
                    "schema": network.SCHEMA_VERSION,
                    "config": config,
                    "v_squeezed_quadrature": v_sq,
                    "v_min": hom.v_min,
                    "v_max": hom.v_max,
                    "theta_min": hom.theta_min,
                    "hot_variance_closed_form": closedform.hot_variance(params),
                    "cold_loss": network.cold_throughput(net),
                }
            ),
        )
    return EXIT_OK


def chain_report(n_nodes, eps, r_in, threshold_db, n_phi, phase_position="after") -> list:
    """Fractions below threshold under every supported chain convention."""
    grid = analysis.default_phi_grid(n_phi)
    rows = []
    for policy in network.HOM_POLICIES:
        for readout in network.READOUTS:
            c = ChainSpec(n_nodes, eps, 0.0, r_in, policy, phase_position, readout)
            db = analysis.chain_phase_profile(c, grid)
            below = float(np.mean(db < threshold_db - analysis.GUARD))
            rows.append(
                {
                    "hom_policy": policy,
                    "readout": readout,
                    "fraction_below": below,
                    "fraction_at_or_above": 1.0 - below,
                    "best_db": float(db.max()),
                    "worst_db": float(db.min()),
                }
            )
    return rows


def cmd_chain(args) -> int:
    r_in = _input_r(args)
    c = ChainSpec(args.nodes, args.eps, 0.0, r_in, args.policy, args.phase_position, args.readout)
    grid = analysis.default_phi_grid(args.phi_sweep)
    db = analysis.chain_phase_profile(c, grid)
    below = float(np.mean(db < args.threshold_db - analysis.GUARD))
    baseline = network.incoherent_baseline(args.nodes, args.eps, r_in)
    print(
        f"fraction below {args.threshold_db:g} dB = {below:.4f} "
        f"(at or above: {1 - below:.4f}) [hom_policy={args.policy}, readout={args.readout}, "
        f"phase_position={args.phase_position}, {args.phi_sweep} phases]"
    )
    print(f"incoherent baseline (per-node loss 1-(1-eps)^N) = {baseline:.2f} dB")
    quoted = QUOTED_BASELINE_DB.get(round(args.eps, 6))
    if quoted is not None and args.nodes == 10 and abs(gaussian.r_to_db(r_in) - 15.0) < 1e-9:
        print(
            f"note: the quoted incoherent-model value for this chain is {quoted:.1f} dB; "
            f"the per-node loss model gives {baseline:.2f} dB (loss convention differs, not reconciled)"
        )
    conventions = chain_report(args.nodes, args.eps, r_in, args.threshold_db, args.phi_sweep, args.phase_position)
    for row in conventions:
        print(
            f"  convention hom_policy={row['hom_policy']:<9} readout={row['readout']:<8} "
            f"below={row['fraction_below']:.4f} at_or_above={row['fraction_at_or_above']:.4f}"
        )
    if args.output:
        config = {
            "command": "chain",
            "spec": c.to_dict(),
            "phi_points": args.phi_sweep,
            "threshold_db": args.threshold_db,
        }
        if args.format == "csv":
            text = output.chain_csv(grid, db, args.threshold_db, config)
        else:
            text = output.dumps(
                {
                    "schema": network.SCHEMA_VERSION,
                    "config": config,
                    "fraction_below": below,
                    "incoherent_baseline_db": baseline,
                    "quoted_baseline_db": quoted,
                    "conventions": conventions,
                    "phi_rad": grid,
                    "squeezing_db": db,
                }
            )
        output.write_atomic(args.output, text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, resolved = load_config(args.spec, args.set)
    omega = 2 * np.pi * args.omega_hz
    if args.eps_grid:
        eps = [float(x) for x in args.eps_grid.split(",")]
        sweep = analysis.mismatch_sweep(spec, eps, args.phi, omega, args.differential)
    else:
        sweep = analysis.phase_sweep(spec, analysis.default_phi_grid(args.phi_points), omega, args.differential)
    _check_sweep_physical(sweep.v_min, sweep.v_max)
    config = {"command": "sweep", "spec": resolved, "omega_hz": args.omega_hz,
              "phi_points": args.phi_points, "eps_grid": args.eps_grid, "phi": args.phi,
              "differential": args.differential}
    text = output.sweep_csv(sweep, config) if args.format == "csv" else output.sweep_json(sweep, config)
    _emit(args, text)
    worst = int(np.argmax(sweep.v_min))
    summary = _summary_line(sweep.v_min[worst], sweep.phi[worst])
    print(summary, file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def cmd_map(args) -> int:
    spec, resolved = load_config(args.spec, args.set)
    if not isinstance(spec, NetworkSpec):
        raise ConfigError("map needs a network spec")
    pmap = analysis.hyperloss_map(spec, analysis.default_phi_grid(args.phi_points), differential=args.differential)
    if np.any(~np.isfinite(pmap.v_min)) or np.any(pmap.v_min <= 0):
        raise InvalidState("non-physical variance in map")
    config = {"command": "map", "spec": resolved, "phi_points": args.phi_points,
              "differential": args.differential}
    text = output.map_csv(pmap, config) if args.format == "csv" else output.map_json(pmap, config)
    _emit(args, text)
    omega = 2 * np.pi * args.slice_hz
    row = pmap.worst_row(omega)
    msg = _summary_line(pmap.slice_at(omega)[row], pmap.phi_grid[row])
    print(f"{msg} (slice at {args.slice_hz:g} Hz)", file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def cmd_optimize(args) -> int:
    spec, resolved = load_config(args.spec, args.set)
    if isinstance(spec, ChainSpec):
        free = None if not args.free else [int(x) for x in args.free.split(",")]
    else:
        if args.free:
            free = [int(x) for x in args.free.split(",")]
        elif spec.sweep_component is not None:
            free = [spec.sweep_component]
        else:
            raise ConfigError("no free phases: pass --free or set sweep_component")
    problem = OptProblem(spec, free, omega=2 * np.pi * args.omega_hz)
    res = optimize_phases(problem, args.grid_density, args.seeds, args.seed)
    phis = ", ".join(f"{p:.6f}" for p in res.phi_star)
    print(f"optimum squeezing = {res.value:.4f} dB at phi = [{phis}] ({res.n_evals} evaluations)")
    payload = {
        "schema": network.SCHEMA_VERSION,
        "config": {"command": "optimize", "spec": resolved, "free_phases": free,
                   "omega_hz": args.omega_hz, "grid_density": args.grid_density,
                   "seeds": args.seeds, "seed": args.seed},
        "phi_star": res.phi_star,
        "value_db": res.value,
        "coarse_best_db": res.coarse_best,
        "n_evals": res.n_evals,
    }
    if args.sigma is not None:
        rob = robustness(problem, res.phi_star, args.sigma, args.samples, args.seed)
        print(f"robustness (sigma={args.sigma:g} rad): mean = {rob.mean_db:.4f} dB, 5th percentile = {rob.p05_db:.4f} dB")
        payload["robustness"] = {"sigma": args.sigma, "mean_db": rob.mean_db, "p05_db": rob.p05_db,
                                 "n_samples": rob.n_samples}
    if args.output:
        output.write_atomic(args.output, output.dumps(payload))
    return EXIT_OK


def cmd_selftest(args) -> int:
    checks = selftest.run_checks()
    for check in checks:
        print(check.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperloss",
        description="Squeezed-light degradation by coherent spatial-mode mixing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_sqz(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--sqz-db", type=float, default=0.0, help="input squeezing in dB")
        g.add_argument("--r", type=float, default=None, help="input squeeze parameter")

    p = sub.add_parser("coldloss", help="carrier power loss of the two-coupler cell")
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--phi", type=parse_angle, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_coldloss)

    p = sub.add_parser("mz", help="squeezed-light noise after the two-coupler cell")
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--phi", type=parse_angle, required=True)
    add_sqz(p)
    p.add_argument("--external-loss", type=float, default=0.0)
    p.add_argument("--readout", choices=network.READOUTS, default="squeezed")
    p.add_argument("--output")
    p.set_defaults(func=cmd_mz)

    p = sub.add_parser("chain", help="phase statistics of an N-node mixing chain")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    add_sqz(p)
    p.add_argument("--phi-sweep", type=int, default=analysis.DEFAULT_PHI_POINTS)
    p.add_argument("--threshold-db", type=float, default=10.0)
    p.add_argument("--policy", choices=network.HOM_POLICIES, default="shared")
    p.add_argument("--phase-position", choices=network.PHASE_POSITIONS, default="after")
    p.add_argument("--readout", choices=network.READOUTS, default="squeezed")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_chain)

    def add_spec(p):
        p.add_argument("spec", help="schema-1 JSON network or chain description")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override an existing field, e.g. external_loss=0.3 or components.1.phi=pi")
        p.add_argument("--output")

    p = sub.add_parser("sweep", help="sweep the phase (default) or a common mismatch")
    add_spec(p)
    p.add_argument("--phi-points", type=int, default=analysis.DEFAULT_PHI_POINTS)
    p.add_argument("--eps-grid", help="comma-separated mismatch values; switches to a mismatch sweep")
    p.add_argument("--phi", type=parse_angle, default=None, help="fixed phase for a mismatch sweep")
    p.add_argument("--omega-hz", type=float, default=0.0)
    p.add_argument("--differential", action="store_true", help="sweep the DC FM-HOM differential phase")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("map", help="minimal variance over (phase, frequency)")
    add_spec(p)
    p.add_argument("--phi-points", type=int, default=180)
    p.add_argument("--slice-hz", type=float, default=network.SLICE_HZ)
    p.add_argument("--differential", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("optimize", help="phase assignment maximizing output squeezing")
    add_spec(p)
    p.add_argument("--free", help="comma-separated component (network) or node (chain) indices")
    p.add_argument("--omega-hz", type=float, default=0.0)
    p.add_argument("--grid-density", type=int, default=32)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=None, help="phase error for a robustness estimate")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("selftest", help="run built-in consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        # overflow surfaces as an InvalidState with a clearer message
        with np.errstate(over="ignore", invalid="ignore"):
            return args.func(args)
    except InvalidState as exc:
        print(f"error: non-physical state: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ConfigError, InvalidArgument, InvalidProblem, BudgetExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
