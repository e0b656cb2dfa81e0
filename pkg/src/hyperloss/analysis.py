"""Parameter sweeps, hyperloss classification and (phase, frequency) maps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import gaussian
from ._parallel import ordered_map
from .components import Coupler
from .errors import ConfigError, InvalidArgument
from .network import (
    READOUTS,
    ChainSpec,
    NetworkSpec,
    chain_evaluate,
    cold_throughput,
    evaluate,
    network_baseline_variance,
)

GUARD = 1e-9
DEFAULT_PHI_POINTS = 720


def default_phi_grid(n: int = DEFAULT_PHI_POINTS) -> np.ndarray:
    """``n`` equally spaced phases covering ``[0, 2*pi)``."""
    return 2 * np.pi * np.arange(n) / n


@dataclass
class SweepResult:
    """Per-grid-point readout statistics of a one-parameter sweep.

    ``v_min``/``v_max`` are the optimal-angle extremes, ``v_squeezed`` the
    variance of the input's squeezed quadrature. ``phi``/``eps`` record the
    value of both parameters at every point, whichever one was swept.
    """

    axis: str
    grid: np.ndarray
    v_min: np.ndarray
    v_max: np.ndarray
    v_squeezed: np.ndarray
    phi: np.ndarray
    eps: np.ndarray
    omega: float = 0.0
    cold_loss: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.grid)
        for name in ("v_min", "v_max", "v_squeezed", "phi", "eps"):
            if len(getattr(self, name)) != n:
                raise InvalidArgument(f"{name} length does not match grid length {n}")
        if self.cold_loss is not None and len(self.cold_loss) != n:
            raise InvalidArgument("cold_loss length does not match grid length")

    def variance(self, readout: str = "optimal") -> np.ndarray:
        if readout == "optimal":
            return self.v_min
        if readout == "squeezed":
            return self.v_squeezed
        raise InvalidArgument(f"readout must be one of {READOUTS}, got {readout!r}")

    def squeezing_db(self, readout: str = "optimal") -> np.ndarray:
        return -10.0 * np.log10(self.variance(readout))


@dataclass
class PhaseMap:
    phi_grid: np.ndarray
    omega_grid: np.ndarray
    v_min: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.v_min.shape != (len(self.phi_grid), len(self.omega_grid)):
            raise InvalidArgument("v_min shape must be (len(phi_grid), len(omega_grid))")

    def column(self, omega: float) -> int:
        """Index of the grid frequency closest to ``omega`` (rad/s)."""
        return int(np.argmin(np.abs(np.asarray(self.omega_grid) - omega)))

    def slice_at(self, omega: float) -> np.ndarray:
        return self.v_min[:, self.column(omega)]

    def hyperloss_rows(self, omega: float) -> np.ndarray:
        return np.flatnonzero(self.slice_at(omega) > 1.0 + GUARD)

    def worst_row(self, omega: float) -> int:
        """Phase index with the most noise at ``omega`` (the hyperloss slice)."""
        return int(np.argmax(self.slice_at(omega)))


def _set_phase(spec, phi: float, differential: bool):
    if isinstance(spec, ChainSpec):
        return spec.with_phase(phi)
    if differential:
        return spec.with_differential_phase(phi)
    return spec.with_phase(phi)


def _network(spec) -> NetworkSpec:
    return spec.to_network() if isinstance(spec, ChainSpec) else spec


def _point(net: NetworkSpec, omega: float, with_cold: bool):
    state = evaluate(net, omega)
    ro = net.readout_index
    hom = gaussian.min_max_variance(state, ro)
    v_sq = gaussian.quadrature_variance(state, ro, net.input.angle)
    cold = cold_throughput(net) if with_cold else np.nan
    return hom.v_min, hom.v_max, v_sq, cold


def _uniform_eps(net: NetworkSpec) -> float:
    eps = {c.epsilon for c in net.components if isinstance(c, Coupler)}
    return eps.pop() if len(eps) == 1 else np.nan


def _spec_phase(spec) -> float:
    if isinstance(spec, ChainSpec):
        phases = spec.node_phases()
        return phases[0] if len(set(phases)) == 1 else np.nan
    if spec.sweep_component is None:
        return np.nan
    return spec.phase_of(spec.sweep_component)


def _metadata(spec, **extra) -> dict:
    out = {"spec": spec.to_dict()}
    out.update(extra)
    return out


def phase_sweep(spec, phi_grid=None, omega: float = 0.0, differential: bool = False) -> SweepResult:
    """Readout statistics versus the spec's sweepable phase.

    For a chain the common per-node phase is swept. For a network the
    ``sweep_component`` is retuned, or with ``differential=True`` the DC
    FM-HOM differential phase is set directly.
    """
    grid = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    if grid.size == 0:
        raise InvalidArgument("phi grid is empty")
    nets = [_network(_set_phase(spec, phi, differential)) for phi in grid]
    rows = np.array(ordered_map(lambda n: _point(n, omega, True), nets), dtype=float)
    eps = np.full(grid.size, _uniform_eps(nets[0]))
    return SweepResult(
        axis="phi_rad",
        grid=grid,
        v_min=rows[:, 0],
        v_max=rows[:, 1],
        v_squeezed=rows[:, 2],
        phi=grid.copy(),
        eps=eps,
        omega=float(omega),
        cold_loss=rows[:, 3],
        metadata=_metadata(spec, sweep="phase", differential=differential),
    )


def _set_mismatch(spec, eps: float):
    if isinstance(spec, ChainSpec):
        return replace(spec, eps=float(eps))
    comps = tuple(
        c.replace(epsilon=float(eps)) if isinstance(c, Coupler) else c for c in spec.components
    )
    return replace(spec, components=comps)


def mismatch_sweep(
    spec, eps_grid, phi: float | None = None, omega: float = 0.0, differential: bool = False
) -> SweepResult:
    """Readout statistics versus a common coupler mismatch, at fixed phase ``phi``."""
    grid = np.asarray(eps_grid, dtype=float)
    if grid.size == 0:
        raise InvalidArgument("eps grid is empty")
    base = spec if phi is None else _set_phase(spec, phi, differential)
    nets = [_network(_set_mismatch(base, e)) for e in grid]
    rows = np.array(ordered_map(lambda n: _point(n, omega, True), nets), dtype=float)
    return SweepResult(
        axis="eps",
        grid=grid,
        v_min=rows[:, 0],
        v_max=rows[:, 1],
        v_squeezed=rows[:, 2],
        phi=np.full(grid.size, _spec_phase(base)),
        eps=grid.copy(),
        omega=float(omega),
        cold_loss=rows[:, 3],
        metadata=_metadata(base, sweep="mismatch", differential=differential),
    )


def hyperloss_region(sweep: SweepResult, readout: str = "optimal") -> list:
    """Grid indices whose readout noise lies above shot noise."""
    return [int(i) for i in np.flatnonzero(sweep.variance(readout) > 1.0 + GUARD)]


def chain_phase_profile(c: ChainSpec, phi_grid=None, readout: str | None = None) -> np.ndarray:
    """Chain output squeezing (dB) at each common phase of the grid."""
    grid = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    return np.array(ordered_map(lambda p: chain_evaluate(c.with_phase(p), readout), grid))


def fraction_below_threshold(
    c: ChainSpec, threshold_db: float, phi_grid=None, readout: str | None = None
) -> float:
    """Share of common-phase realizations whose output squeezing misses ``threshold_db``."""
    grid = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    if grid.size == 0:
        raise InvalidArgument("phi grid is empty")
    db = chain_phase_profile(c, grid, readout)
    return float(np.mean(db < threshold_db - GUARD))


def hyperloss_map(
    net: NetworkSpec, phi_grid=None, omega_grid=None, differential: bool = False
) -> PhaseMap:
    """Optimal-angle minimal variance over (phase, frequency)."""
    if isinstance(net, ChainSpec):
        raise ConfigError("hyperloss_map needs a network spec")
    phis = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    omegas = np.asarray(net.frequency_grid if omega_grid is None else omega_grid, dtype=float)
    if omegas.size == 0:
        raise ConfigError("network has an empty frequency grid")
    ro = net.readout_index

    def row(phi):
        tuned = _set_phase(net, phi, differential)
        return [gaussian.min_max_variance(evaluate(tuned, w), ro).v_min for w in omegas]

    vmin = np.array(ordered_map(row, phis), dtype=float)
    return PhaseMap(
        phi_grid=phis,
        omega_grid=omegas,
        v_min=vmin,
        metadata=_metadata(net, differential=differential),
    )


@dataclass(frozen=True)
class RecoveryReport:
    """Squeezing at a chosen phase and the pure loss that would explain it.

    ``effective_loss`` is the total loss fraction that turns the pure input
    into the observed variance; ``mismatch_loss`` is the part left after
    removing the known external loss.
    """

    phi: float
    omega: float
    v_min: float
    recovered_db: float
    input_db: float
    effective_loss: float
    mismatch_loss: float
    geometric_mismatch: float
    baseline_db: float


def equivalent_loss(v_out: float, v_in: float) -> float:
    """Loss fraction ``lam`` with ``(1 - lam) * v_in + lam = v_out``."""
    if np.isclose(v_in, 1.0):
        raise InvalidArgument("input variance equals shot noise; loss is undefined")
    return float((v_out - v_in) / (1.0 - v_in))


def recovery_report(
    net: NetworkSpec,
    phi_star: float,
    omega: float = 0.0,
    readout: str = "optimal",
    differential: bool = False,
) -> RecoveryReport:
    tuned = _set_phase(net, phi_star, differential)
    state = evaluate(tuned, omega)
    ro = tuned.readout_index
    if readout == "optimal":
        v = gaussian.min_max_variance(state, ro).v_min
    elif readout == "squeezed":
        v = gaussian.quadrature_variance(state, ro, tuned.input.angle)
    else:
        raise InvalidArgument(f"readout must be one of {READOUTS}, got {readout!r}")
    v_in = tuned.input_variance
    eff = equivalent_loss(v, v_in)
    mismatch = 1.0 - (1.0 - eff) / (1.0 - tuned.external_loss) if tuned.external_loss < 1 else np.nan
    return RecoveryReport(
        phi=float(phi_star),
        omega=float(omega),
        v_min=float(v),
        recovered_db=gaussian.variance_to_db(v),
        input_db=gaussian.variance_to_db(v_in),
        effective_loss=eff,
        mismatch_loss=float(mismatch),
        geometric_mismatch=tuned.geometric_mismatch(),
        baseline_db=gaussian.variance_to_db(network_baseline_variance(tuned)),
    )
