"""Phase assignments that maximize output squeezing.

The objective lives on a torus of free phases, is cheap to evaluate and
typically has only a few ridges, so a two-stage derivative-free search is
used: a coarse grid (or, in higher dimension, a common-phase diagonal plus
random seeds), followed by coordinate descent with a shrinking step from the
best coarse points.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import gaussian
from .components import PHASE_KINDS
from .errors import BudgetExceeded, InvalidProblem
from .network import READOUTS, ChainSpec, NetworkSpec, readout_variance

log = logging.getLogger(__name__)

TWO_PI = 2 * np.pi
OBJECTIVES = ("max_squeezing", "worst_case_band")


@dataclass(frozen=True)
class OptProblem:
    """Which phases may move and what to maximize.

    For a :class:`NetworkSpec`, ``free_phases`` lists component indices of
    Phase/Gouy (or resonant Cavity) elements. For a :class:`ChainSpec`,
    ``None`` means one common phase for every node, and a list selects
    individual nodes.

    ``max_squeezing`` maximizes the readout squeezing (dB) at ``omega``;
    ``worst_case_band`` maximizes the smallest squeezing over ``band``.
    """

    spec: object
    free_phases: tuple | None = None
    objective: str = "max_squeezing"
    omega: float = 0.0
    band: tuple = ()
    readout: str | None = None
    max_evals: int = 200_000

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise InvalidProblem(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.readout is not None and self.readout not in READOUTS:
            raise InvalidProblem(f"readout must be one of {READOUTS}, got {self.readout!r}")
        if self.objective == "worst_case_band" and not self.band:
            raise InvalidProblem("worst_case_band objective needs a non-empty band")
        free = None if self.free_phases is None else tuple(int(i) for i in self.free_phases)
        object.__setattr__(self, "free_phases", free)
        object.__setattr__(self, "band", tuple(float(w) for w in self.band))
        if isinstance(self.spec, ChainSpec):
            if free is not None:
                bad = [i for i in free if not 0 <= i < self.spec.n_nodes]
                if bad:
                    raise InvalidProblem(f"chain has no node(s) {bad}")
        elif isinstance(self.spec, NetworkSpec):
            if not free:
                raise InvalidProblem("no free phases given")
            for i in free:
                if not 0 <= i < len(self.spec.components):
                    raise InvalidProblem(f"component index {i} out of range")
                comp = self.spec.components[i]
                tunable = comp.kind in PHASE_KINDS or (comp.kind == "cavity" and comp.resonant)
                if not tunable:
                    raise InvalidProblem(f"component {i} ({comp.kind}) is not a tunable phase")
        else:
            raise InvalidProblem(f"unsupported spec type {type(self.spec).__name__}")
        if self.n_free < 1:
            raise InvalidProblem("no free phases given")

    @property
    def n_free(self) -> int:
        if isinstance(self.spec, ChainSpec) and self.free_phases is None:
            return 1 if self.spec.n_nodes else 0
        return len(self.free_phases or ())

    @property
    def effective_readout(self) -> str:
        if self.readout is not None:
            return self.readout
        if isinstance(self.spec, ChainSpec):
            return self.spec.readout
        return "optimal"

    def network(self, phases) -> NetworkSpec:
        phases = [float(p) for p in np.atleast_1d(phases)]
        spec = self.spec
        if isinstance(spec, ChainSpec):
            if self.free_phases is None:
                return spec.with_phase(phases[0]).to_network()
            node = list(spec.node_phases())
            for idx, phi in zip(self.free_phases, phases):
                node[idx] = phi
            return replace(spec, phi=tuple(node)).to_network()
        return spec.with_phases(phases, self.free_phases)

    def initial_phases(self) -> np.ndarray:
        spec = self.spec
        if isinstance(spec, ChainSpec):
            node = spec.node_phases()
            if self.free_phases is None:
                return np.array([node[0]])
            return np.array([node[i] for i in self.free_phases])
        return np.array([spec.phase_of(i) for i in self.free_phases])

    def value(self, phases) -> float:
        """Objective in dB of squeezing (larger is better)."""
        net = self.network(phases)
        readout = self.effective_readout
        if self.objective == "max_squeezing":
            return gaussian.variance_to_db(readout_variance(net, self.omega, readout))
        worst = max(readout_variance(net, w, readout) for w in self.band)
        return gaussian.variance_to_db(worst)


@dataclass
class OptResult:
    phi_star: np.ndarray
    value: float
    coarse_best: float
    n_evals: int
    trace: list = field(default_factory=list)


class _Counter:
    def __init__(self, problem: OptProblem):
        self.problem = problem
        self.n = 0
        self.best = (-np.inf, None)
        self.trace: list = []

    def __call__(self, phases) -> float:
        if self.n >= self.problem.max_evals:
            raise BudgetExceeded(f"objective evaluation budget of {self.problem.max_evals} exhausted")
        self.n += 1
        phases = np.mod(np.asarray(phases, dtype=float), TWO_PI)
        val = self.problem.value(phases)
        if _better(val, phases, *self.best):
            self.best = (val, phases.copy())
            self.trace.append({"n_evals": self.n, "value": val, "phi": phases.tolist()})
        return val


def _better(val, phases, best_val, best_phases) -> bool:
    if best_phases is None or val > best_val:
        return True
    return val == best_val and tuple(phases) < tuple(best_phases)


def _coarse_points(dim: int, density: int, seed_count: int, rng) -> np.ndarray:
    axis = TWO_PI * np.arange(density) / density
    if dim <= 3:
        return np.array(list(itertools.product(axis, repeat=dim)))
    diagonal = np.repeat(axis[:, None], dim, axis=1)
    extra = rng.uniform(0.0, TWO_PI, size=(seed_count, dim))
    return np.vstack([diagonal, extra])


def _coordinate_descent(f, x0, f0, step, min_step, min_gain):
    x, fx = np.array(x0, dtype=float), f0
    while step >= min_step:
        improved = False
        for i in range(len(x)):
            for direction in (1.0, -1.0):
                trial = x.copy()
                trial[i] = np.mod(trial[i] + direction * step, TWO_PI)
                ft = f(trial)
                if ft > fx + min_gain:
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            step *= 0.5
    return x, fx


def optimize_phases(
    p: OptProblem,
    grid_density: int = 32,
    seed_count: int = 8,
    seed: int = 0,
    min_step: float = 1e-6,
    min_gain: float = 1e-12,
) -> OptResult:
    """Maximize the objective over the free phases.

    Returns the best point seen; the value never falls below the best coarse
    point. Deterministic for fixed ``seed``.
    """
    dim = p.n_free
    if dim < 1:
        raise InvalidProblem("no free phases given")
    if grid_density < 1:
        raise InvalidProblem("grid_density must be >= 1")
    rng = np.random.default_rng(seed)
    coarse = _coarse_points(dim, grid_density, seed_count, rng)
    if len(coarse) > p.max_evals:
        raise BudgetExceeded(
            f"coarse stage needs {len(coarse)} evaluations, budget is {p.max_evals}"
        )
    f = _Counter(p)
    values = np.array([f(x) for x in coarse])
    coarse_best = f.best[0]
    # best distinct starts, ties by lexicographic phase order
    order = sorted(range(len(coarse)), key=lambda i: (-values[i], tuple(coarse[i])))
    starts = order[: max(1, seed_count)]
    step = TWO_PI / grid_density
    try:
        for i in starts:
            _coordinate_descent(f, coarse[i], values[i], step, min_step, min_gain)
    except BudgetExceeded:
        log.warning("evaluation budget hit during refinement; returning best point so far")
    best_val, best_phi = f.best
    return OptResult(
        phi_star=np.asarray(best_phi),
        value=float(best_val),
        coarse_best=float(coarse_best),
        n_evals=f.n,
        trace=f.trace,
    )


@dataclass(frozen=True)
class Robustness:
    mean_db: float
    p05_db: float
    n_samples: int


def robustness(
    p: OptProblem, phi_star, sigma: float, n_samples: int = 1000, rng_seed: int = 0
) -> Robustness:
    """Objective statistics under independent uniform phase errors in ``[-sigma, sigma]``."""
    if sigma < 0:
        raise InvalidProblem("sigma must be >= 0")
    if n_samples < 1:
        raise InvalidProblem("n_samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    base = np.atleast_1d(np.asarray(phi_star, dtype=float))
    offsets = rng.uniform(-sigma, sigma, size=(n_samples, base.size))
    vals = np.array([p.value(np.mod(base + off, TWO_PI)) for off in offsets])
    return Robustness(
        mean_db=float(np.mean(vals)),
        p05_db=float(np.percentile(vals, 5)),
        n_samples=n_samples,
    )
