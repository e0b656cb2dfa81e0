"""Analytic results for the two-coupler (Mach-Zehnder-like) mode-mixing cell.

A squeezed fundamental mode (FM) meets a vacuum higher-order mode (HOM) at
two couplers; between them the HOM is rotated by the differential phase
``phi``. Mismatches are given as power fractions ``eps`` and converted to
coupling angles ``k = arcsin(sqrt(eps))``.

Variances returned here refer to the input's squeezed quadrature, which the
real couplers and the HOM-only phase leave unrotated in the FM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


def coupling_angle(eps: float) -> float:
    """Mixing angle ``k`` of a coupler transferring power fraction ``eps``."""
    if not 0.0 <= eps < 1.0:
        raise InvalidArgument(f"mismatch fraction must lie in [0, 1), got {eps}")
    return float(np.arcsin(np.sqrt(eps)))


def mismatch_from_angle(k: float) -> float:
    """Power fraction ``sin^2 k`` for a coupling angle ``k``."""
    return float(np.sin(k) ** 2)


@dataclass(frozen=True)
class MzParams:
    eps1: float
    eps2: float
    phi: float
    r: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1), got {val}")
        if not (np.isfinite(self.r) and self.r >= 0):
            raise InvalidArgument(f"squeeze parameter must be finite and >= 0, got {self.r}")
        if not np.isfinite(self.phi):
            raise InvalidArgument(f"phase must be finite, got {self.phi}")

    @property
    def k1(self) -> float:
        return coupling_angle(self.eps1)

    @property
    def k2(self) -> float:
        return coupling_angle(self.eps2)


@dataclass(frozen=True)
class EffectiveChannel:
    """Weak-coupling description: effective loss plus additive thermal noise."""

    lambda_smm: float
    T: float


def cold_loss_exact(eps1: float, eps2: float, phi: float) -> float:
    """Carrier power lost from the FM after both couplers, ``1 - P_out/P_in``."""
    k1, k2 = coupling_angle(eps1), coupling_angle(eps2)
    amp = np.cos(k1) * np.cos(k2) - np.exp(1j * phi) * np.sin(k1) * np.sin(k2)
    return float(1.0 - abs(amp) ** 2)


def cold_loss_smallk(eps1: float, eps2: float, phi: float) -> float:
    """Leading-order cold loss ``k1^2 + k2^2 + 2 k1 k2 cos(phi)`` with ``k_i^2 = eps_i``."""
    if not (0.0 <= eps1 < 1.0 and 0.0 <= eps2 < 1.0):
        raise InvalidArgument("mismatch fractions must lie in [0, 1)")
    return float(eps1 + eps2 + 2.0 * np.sqrt(eps1 * eps2) * np.cos(phi))


def hot_variance(p: MzParams) -> float:
    """Squeezed-quadrature noise after the cell, relative to shot noise.

    Four independent input noises reach the readout: the HOM vacuum in both
    quadratures, the FM squeezed quadrature and, through the HOM rotation,
    the FM anti-squeezed quadrature.
    """
    k1, k2, phi = p.k1, p.k2, p.phi
    c1, s1, c2, s2 = np.cos(k1), np.sin(k1), np.cos(k2), np.sin(k2)
    cphi, sphi = np.cos(phi), np.sin(phi)
    sqz, anti = np.exp(-2.0 * p.r), np.exp(2.0 * p.r)
    return float(
        (c2 * s1 + c1 * cphi * s2) ** 2
        + sqz * (c1 * c2 - cphi * s1 * s2) ** 2
        + c1**2 * s2**2 * sphi**2
        + anti * s1**2 * s2**2 * sphi**2
    )


def effective_channel(p: MzParams) -> EffectiveChannel:
    lam = cold_loss_smallk(p.eps1, p.eps2, p.phi)
    T = p.eps1 * p.eps2 * np.exp(2.0 * p.r) * np.sin(p.phi) ** 2
    return EffectiveChannel(lambda_smm=lam, T=float(T))


def hot_variance_weak(p: MzParams) -> float:
    """Weak-coupling approximation: pure loss ``lambda_smm`` plus thermal term ``T``."""
    ch = effective_channel(p)
    return float(np.exp(-2.0 * p.r) * (1.0 - ch.lambda_smm) + ch.lambda_smm + ch.T)


def is_hyperloss(p: MzParams, readout: str = "squeezed") -> bool:
    """Whether the measured noise exceeds shot noise.

    ``readout="squeezed"`` tests the input squeezed quadrature (the analytic
    cell variance). ``readout="optimal"`` simulates the cell and tests the
    least-noisy homodyne angle instead; with frequency-flat optics the
    optimal angle rotates around the injected anti-squeezing and usually
    stays below shot noise.
    """
    if readout == "squeezed":
        return hot_variance(p) > 1.0
    if readout == "optimal":
        from .network import mz_network, evaluate_homodyne

        return evaluate_homodyne(mz_network(p.eps1, p.eps2, p.phi, r=p.r), 0.0).v_min > 1.0
    raise InvalidArgument(f"readout must be 'squeezed' or 'optimal', got {readout!r}")


def equal_mismatch_special_cases(k: float, r: float) -> dict:
    """Equal-coupling values at ``phi = pi, 0, pi/2`` written out in closed form."""
    sqz, anti = np.exp(-2.0 * r), np.exp(2.0 * r)
    c, s = np.cos(k), np.sin(k)
    return {
        "pi": sqz,
        "zero": np.sin(2 * k) ** 2 + sqz * np.cos(2 * k) ** 2,
        "half_pi": sqz * c**4 + 2 * c**2 * s**2 + anti * s**4,
    }
