"""Built-in consistency checks run by ``hyperloss selftest``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import closedform, components
from .gaussian import symplectic_form
from .network import mz_network, readout_variance

ORACLE_EPS = (0.0, 0.01, 0.05, 0.08, 0.2)
ORACLE_PHI = tuple(np.arange(17) * np.pi / 8)
ORACLE_R = (0.0, 0.5, 1.0, 1.5)


@dataclass(frozen=True)
class Check:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<38} max_err={self.max_error:.3e}  tol={self.tolerance:.0e}"


def oracle_grid_error() -> float:
    """Largest gap between the analytic cell variance and the Gaussian simulation."""
    worst = 0.0
    for e1, e2, phi, r in itertools.product(ORACLE_EPS, ORACLE_EPS, ORACLE_PHI, ORACLE_R):
        analytic = closedform.hot_variance(closedform.MzParams(e1, e2, phi, r))
        simulated = readout_variance(mz_network(e1, e2, phi, r), 0.0, "squeezed")
        worst = max(worst, abs(analytic - simulated))
    return worst


def symplectic_error(seed: int = 7, n: int = 200) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    J = symplectic_form(3)
    for _ in range(n):
        mats = [
            components.coupler_matrix(rng.uniform(0, 0.999), 3, 0, 2),
            components.phase_matrix(rng.uniform(-7, 7), 3, 1),
            components.gouy_matrix(rng.uniform(-7, 7), int(rng.integers(0, 5)), 3, 2),
            components.cavity_reflection_matrix(
                rng.normal(0, 5), rng.normal(0, 3), rng.uniform(0.05, 5), 3, 0, bool(rng.integers(0, 2))
            ),
        ]
        for T in mats:
            worst = max(worst, float(np.max(np.abs(T @ J @ T.conj().T - J))))
    return worst


def special_case_error() -> float:
    worst = 0.0
    for eps, r in itertools.product((0.001, 0.01, 0.08, 0.3, 0.7), (0.0, 0.3, 1.0, 2.0)):
        k = closedform.coupling_angle(eps)
        cases = closedform.equal_mismatch_special_cases(k, r)
        for key, phi in (("pi", np.pi), ("zero", 0.0), ("half_pi", np.pi / 2)):
            val = closedform.hot_variance(closedform.MzParams(eps, eps, phi, r))
            worst = max(worst, abs(val - cases[key]))
    return worst


def cold_loss_error() -> float:
    errs = [
        abs(closedform.cold_loss_exact(0.08, 0.08, np.pi)),
        abs(closedform.cold_loss_exact(0.0, 0.3, 1.234) - 0.3),
        abs(closedform.cold_loss_smallk(0.08, 0.08, 0.0) - 0.32),
    ]
    return max(errs)


def run_checks() -> list:
    return [
        Check("oracle equivalence (5x17x4 grid)", oracle_grid_error(), 1e-10),
        Check("lossless symplectic condition", symplectic_error(), 1e-12),
        Check("equal-mismatch special cases", special_case_error(), 1e-12),
        Check("cold loss identities", cold_loss_error(), 1e-12),
    ]
