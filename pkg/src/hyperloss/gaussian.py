"""Gaussian quadrature statistics of M optical modes at one sideband frequency.

Quadratures are ordered ``(x_1, y_1, x_2, y_2, ...)`` and normalized so the
vacuum has unit variance in every direction. The covariance is a Hermitian
spectral-density matrix: frequency-flat optics keep it real, while cavity
reflections at a nonzero sideband frequency can make it complex. Quadrature
variances are read from its real part.

All functions are pure: they return new :class:`SpectralState` objects and
never modify their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidState

HERMITIAN_TOL = 1e-12
PHYSICAL_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form ``J`` for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _hermitize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.conj().T)


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Quadrature spectral-density matrix plus coherent carrier amplitudes.

    Attributes:
        cov: Hermitian ``2M x 2M`` matrix, identity for vacuum.
        mean: real length-``2M`` vector of coherent quadrature amplitudes.
        omega: sideband frequency in rad/s the statistics refer to.
    """

    cov: np.ndarray
    mean: np.ndarray
    omega: float = 0.0
    n_modes: int = field(init=False)

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=complex)
        mean = np.asarray(self.mean, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise InvalidArgument(f"cov must be a square 2M x 2M matrix, got {cov.shape}")
        if mean.shape != (cov.shape[0],):
            raise InvalidArgument(
                f"mean must have length {cov.shape[0]}, got shape {mean.shape}"
            )
        cov = _hermitize(cov)
        cov.setflags(write=False)
        mean = mean.copy()
        mean.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "n_modes", cov.shape[0] // 2)

    def block(self, mode: int) -> np.ndarray:
        """Real 2x2 quadrature covariance of one mode."""
        _check_mode(self, mode)
        sl = slice(2 * mode, 2 * mode + 2)
        return self.cov[sl, sl].real.copy()

    def is_real(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.cov.imag), initial=0.0) <= tol)

    def allclose(self, other: "SpectralState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.cov, other.cov, rtol=0.0, atol=atol)
            and np.allclose(self.mean, other.mean, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True)
class HomodyneResult:
    """Extremal quadrature variances of one mode and the angles realizing them."""

    v_min: float
    v_max: float
    theta_min: float
    theta_max: float
    omega: float = 0.0

    @property
    def squeezing_db(self) -> float:
        """Noise reduction below shot noise in dB (negative means excess noise)."""
        return -10.0 * np.log10(self.v_min)

    @property
    def antisqueezing_db(self) -> float:
        return 10.0 * np.log10(self.v_max)


def _check_mode(state: SpectralState, mode: int) -> None:
    if not 0 <= int(mode) < state.n_modes:
        raise InvalidArgument(f"mode {mode} out of range for {state.n_modes} modes")


def vacuum_state(n_modes: int, omega: float = 0.0) -> SpectralState:
    if int(n_modes) < 1:
        raise InvalidArgument(f"n_modes must be >= 1, got {n_modes}")
    dim = 2 * int(n_modes)
    return SpectralState(np.eye(dim), np.zeros(dim), omega)


def embed_block(block: np.ndarray, n_modes: int, mode: int) -> np.ndarray:
    """Identity on all modes except ``mode``, where ``block`` acts."""
    dtype = complex if np.iscomplexobj(block) else float
    mat = np.eye(2 * n_modes, dtype=dtype)
    sl = slice(2 * mode, 2 * mode + 2)
    mat[sl, sl] = block
    return mat


def squeeze_block(r: float, angle: float = 0.0) -> np.ndarray:
    """Single-mode squeezer: variance along ``angle`` scaled by ``exp(-2r)``."""
    rot = rotation(angle)
    return rot @ np.diag([np.exp(-r), np.exp(r)]) @ rot.T


def squeeze(state: SpectralState, mode: int, r: float, angle: float = 0.0) -> SpectralState:
    if not np.isfinite(r):
        raise InvalidArgument(f"squeeze parameter must be finite, got {r}")
    _check_mode(state, mode)
    mat = embed_block(squeeze_block(r, angle), state.n_modes, mode)
    return apply_transfer(state, mat)


def apply_transfer(state: SpectralState, transfer: np.ndarray) -> SpectralState:
    """Propagate through a linear transfer: ``cov -> T cov T^H``.

    The coherent mean only follows the real part of ``transfer``; it models a
    carrier-frequency probe and is meaningful for frequency-flat optics.
    """
    mat = np.asarray(transfer)
    dim = 2 * state.n_modes
    if mat.shape != (dim, dim):
        raise InvalidArgument(
            f"transfer matrix shape {mat.shape} does not match state dimension {dim}"
        )
    cov = mat @ state.cov @ mat.conj().T
    mean = mat.real @ state.mean
    return SpectralState(cov, mean, state.omega)


def add_loss(state: SpectralState, mode: int, lam: float) -> SpectralState:
    """Beam-splitter loss channel mixing ``mode`` with vacuum at power fraction ``lam``."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgument(f"loss fraction must lie in [0, 1], got {lam}")
    _check_mode(state, mode)
    scale = np.ones(2 * state.n_modes)
    scale[2 * mode : 2 * mode + 2] = np.sqrt(1.0 - lam)
    cov = state.cov * np.outer(scale, scale)
    sl = slice(2 * mode, 2 * mode + 2)
    cov[sl, sl] += lam * np.eye(2)
    return SpectralState(cov, state.mean * scale, state.omega)


def quadrature_variance(state: SpectralState, mode: int, theta: float) -> float:
    u = np.array([np.cos(theta), np.sin(theta)])
    return float(u @ state.block(mode) @ u)


def min_max_variance(state: SpectralState, mode: int) -> HomodyneResult:
    evals, evecs = np.linalg.eigh(state.block(mode))
    angles = np.mod(np.arctan2(evecs[1], evecs[0]), np.pi)
    return HomodyneResult(
        v_min=float(evals[0]),
        v_max=float(evals[1]),
        theta_min=float(angles[0]),
        theta_max=float(angles[1]),
        omega=state.omega,
    )


def purity(state: SpectralState) -> float:
    """``1/sqrt(det V)`` of the real covariance; equals 1 exactly for pure states."""
    real = state.cov.real
    try:
        np.linalg.cholesky(real)
    except np.linalg.LinAlgError as exc:
        raise InvalidState("covariance is not positive definite") from exc
    sign, logdet = np.linalg.slogdet(real)
    return float(np.exp(-0.5 * logdet))


def physicality_violation(state: SpectralState) -> float:
    """Most negative eigenvalue of ``cov + iJ`` (0 or positive for physical states)."""
    herm = state.cov + 1j * symplectic_form(state.n_modes)
    return float(np.linalg.eigvalsh(_hermitize(herm))[0])


def check_physical(state: SpectralState, tol: float = PHYSICAL_TOL) -> None:
    """Raise :class:`InvalidState` unless the state is Hermitian and physical."""
    asym = np.max(np.abs(state.cov - state.cov.conj().T))
    if asym > HERMITIAN_TOL:
        raise InvalidState(f"covariance not Hermitian (max deviation {asym:.3e})")
    if not np.all(np.isfinite(state.cov)):
        raise InvalidState("covariance contains non-finite entries")
    low = physicality_violation(state)
    if low < -tol:
        raise InvalidState(f"uncertainty relation violated: min eig(cov + iJ) = {low:.3e}")


def db_to_variance(db: float) -> float:
    """Variance relative to shot noise for ``db`` of squeezing (positive = below)."""
    return 10.0 ** (-db / 10.0)


def variance_to_db(variance: float) -> float:
    return -10.0 * np.log10(variance)


def db_to_r(db: float) -> float:
    """Squeeze parameter ``r`` with ``exp(-2r)`` equal to ``db`` of squeezing."""
    return db * np.log(10.0) / 20.0


def r_to_db(r: float) -> float:
    return 20.0 * r / np.log(10.0)
