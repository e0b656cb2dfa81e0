"""Network elements and their quadrature transfer matrices.

Every lossless element maps to a (possibly complex) matrix ``T`` with
``T J T^H = J``. Loss and squeezing are routed straight to the
corresponding :mod:`hyperloss.gaussian` channels.

Mode references inside components are either integer indices or labels
that a network resolves through a ``{label: index}`` mapping.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import ClassVar, Mapping, Union

import numpy as np

from . import gaussian
from .errors import ConfigError, InvalidArgument
from .gaussian import SpectralState, embed_block, rotation

ModeRef = Union[int, str]


def coupler_matrix(epsilon: float, n_modes: int, i: int, j: int) -> np.ndarray:
    """Real beam-splitter rotation moving power fraction ``epsilon`` from mode i to j.

    Swapping ``i`` and ``j`` gives the inverse element.
    """
    if not 0.0 <= epsilon < 1.0:
        raise InvalidArgument(f"coupler power fraction must lie in [0, 1), got {epsilon}")
    if i == j:
        raise InvalidArgument("coupler needs two distinct modes")
    for m in (i, j):
        if not 0 <= m < n_modes:
            raise InvalidArgument(f"mode {m} out of range for {n_modes} modes")
    theta = np.arcsin(np.sqrt(epsilon))
    c, s = np.cos(theta), np.sin(theta)
    mat = np.eye(2 * n_modes)
    bi, bj = slice(2 * i, 2 * i + 2), slice(2 * j, 2 * j + 2)
    mat[bi, bi] = c * np.eye(2)
    mat[bj, bj] = c * np.eye(2)
    mat[bi, bj] = s * np.eye(2)
    mat[bj, bi] = -s * np.eye(2)
    return mat


def phase_matrix(phi: float, n_modes: int, mode: int) -> np.ndarray:
    return embed_block(rotation(phi), n_modes, mode)


def gouy_matrix(psi: float, mode_order: int, n_modes: int, mode: int) -> np.ndarray:
    if mode_order < 0:
        raise InvalidArgument(f"mode order must be >= 0, got {mode_order}")
    return phase_matrix(mode_order * psi, n_modes, mode)


def sideband_reflectivity(omega, delta: float, gamma: float):
    """Amplitude reflectivity of a lossless overcoupled cavity at sideband ``omega``.

    ``gamma`` is the full linewidth; on resonance the carrier reflects with +1,
    far off resonance with -1.
    """
    x = 1j * (np.asarray(omega) - delta)
    return (0.5 * gamma - x) / (0.5 * gamma + x)


def cavity_block(omega: float, delta: float, gamma: float, resonant: bool = True) -> np.ndarray:
    """2x2 quadrature block of a cavity reflection in the two-photon picture."""
    if not gamma > 0:
        raise InvalidArgument(f"cavity linewidth must be positive, got {gamma}")
    if not resonant:
        return -np.eye(2, dtype=complex)
    r_plus = sideband_reflectivity(omega, delta, gamma)
    r_minus_conj = np.conj(sideband_reflectivity(-omega, delta, gamma))
    a = r_plus + r_minus_conj
    b = r_plus - r_minus_conj
    return 0.5 * np.array([[a, 1j * b], [-1j * b, a]])


def cavity_reflection_matrix(
    omega: float, delta: float, gamma: float, n_modes: int, mode: int, resonant: bool = True
) -> np.ndarray:
    return embed_block(cavity_block(omega, delta, gamma, resonant), n_modes, mode)


def _resolve(ref: ModeRef, modes: Mapping[str, int] | None, n_modes: int) -> int:
    if isinstance(ref, str):
        if modes is None or ref not in modes:
            raise ConfigError(f"unknown mode label {ref!r}")
        idx = modes[ref]
    else:
        idx = int(ref)
    if not 0 <= idx < n_modes:
        raise ConfigError(f"mode index {idx} out of range for {n_modes} modes")
    return idx


@dataclass(frozen=True)
class Component:
    """Base class; subclasses implement :meth:`apply`."""

    kind: ClassVar[str] = ""
    lossless: ClassVar[bool] = True

    def transfer(self, omega: float, n_modes: int, modes: Mapping[str, int] | None = None):
        """Transfer matrix at sideband ``omega``, or ``None`` for non-linear-map channels."""
        raise NotImplementedError

    def apply(
        self, state: SpectralState, modes: Mapping[str, int] | None = None
    ) -> SpectralState:
        mat = self.transfer(state.omega, state.n_modes, modes)
        return gaussian.apply_transfer(state, mat)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        out.update(asdict(self))
        if "modes" in out:
            out["modes"] = list(out["modes"])
        return out

    def replace(self, **changes) -> "Component":
        params = {f.name: getattr(self, f.name) for f in fields(self)}
        params.update(changes)
        return type(self)(**params)


@dataclass(frozen=True)
class Coupler(Component):
    epsilon: float
    modes: tuple = (0, 1)
    kind: ClassVar[str] = "coupler"

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidArgument(f"coupler epsilon must lie in [0, 1), got {self.epsilon}")
        if len(self.modes) != 2:
            raise InvalidArgument("coupler needs exactly two modes")
        object.__setattr__(self, "modes", tuple(self.modes))

    def transfer(self, omega, n_modes, modes=None):
        i = _resolve(self.modes[0], modes, n_modes)
        j = _resolve(self.modes[1], modes, n_modes)
        return coupler_matrix(self.epsilon, n_modes, i, j)


@dataclass(frozen=True)
class Phase(Component):
    phi: float
    mode: ModeRef = 1
    kind: ClassVar[str] = "phase"

    def transfer(self, omega, n_modes, modes=None):
        return phase_matrix(self.phi, n_modes, _resolve(self.mode, modes, n_modes))


@dataclass(frozen=True)
class Gouy(Component):
    psi: float
    mode_order: int = 1
    mode: ModeRef = 1
    kind: ClassVar[str] = "gouy"

    def transfer(self, omega, n_modes, modes=None):
        idx = _resolve(self.mode, modes, n_modes)
        return gouy_matrix(self.psi, self.mode_order, n_modes, idx)


@dataclass(frozen=True)
class Cavity(Component):
    delta: float
    gamma: float
    mode: ModeRef = 0
    resonant: bool = True
    kind: ClassVar[str] = "cavity"

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidArgument(f"cavity gamma must be positive, got {self.gamma}")

    def transfer(self, omega, n_modes, modes=None):
        idx = _resolve(self.mode, modes, n_modes)
        return cavity_reflection_matrix(omega, self.delta, self.gamma, n_modes, idx, self.resonant)

    @property
    def carrier_phase(self) -> float:
        """Reflection phase imprinted on the carrier (``omega = 0``)."""
        if not self.resonant:
            return float(np.pi)
        return float(np.angle(sideband_reflectivity(0.0, self.delta, self.gamma)))

    def with_carrier_phase(self, phase: float) -> "Cavity":
        """Same cavity detuned so the carrier reflects with ``phase``."""
        wrapped = np.angle(np.exp(1j * phase))
        return self.replace(delta=0.5 * self.gamma * np.tan(0.5 * wrapped))


@dataclass(frozen=True)
class Loss(Component):
    lam: float
    mode: ModeRef = 0
    kind: ClassVar[str] = "loss"
    lossless: ClassVar[bool] = False

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidArgument(f"loss fraction must lie in [0, 1], got {self.lam}")

    def transfer(self, omega, n_modes, modes=None):
        return None

    def apply(self, state, modes=None):
        return gaussian.add_loss(state, _resolve(self.mode, modes, state.n_modes), self.lam)


@dataclass(frozen=True)
class Squeezer(Component):
    r: float
    angle: float = 0.0
    mode: ModeRef = 0
    kind: ClassVar[str] = "squeezer"

    def __post_init__(self):
        if not np.isfinite(self.r):
            raise InvalidArgument(f"squeeze parameter must be finite, got {self.r}")

    def transfer(self, omega, n_modes, modes=None):
        idx = _resolve(self.mode, modes, n_modes)
        return embed_block(gaussian.squeeze_block(self.r, self.angle), n_modes, idx)


COMPONENT_TYPES = {cls.kind: cls for cls in (Coupler, Phase, Gouy, Cavity, Loss, Squeezer)}
PHASE_KINDS = ("phase", "gouy")


def component_from_dict(data: Mapping) -> Component:
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in COMPONENT_TYPES:
        raise ConfigError(f"unknown component kind {kind!r}; expected one of {sorted(COMPONENT_TYPES)}")
    cls = COMPONENT_TYPES[kind]
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{kind}: unknown field(s) {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{kind}: {exc}") from exc
