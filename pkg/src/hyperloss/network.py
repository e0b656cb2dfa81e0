"""Optical networks over named spatial modes and N-node mode-mixing chains.

A :class:`NetworkSpec` starts from vacuum, squeezes the input mode, folds its
components in order, applies a lumped external loss to the readout mode and
is read out by homodyne detection. A :class:`ChainSpec` is a shorthand for
the repeated ``coupler + differential phase`` cell and compiles to a
``NetworkSpec``.

Two readouts are supported throughout:

``"optimal"``
    the least-noisy homodyne angle at each frequency (minimum eigenvalue of
    the readout mode's covariance block);
``"squeezed"``
    the fixed quadrature along which the input was squeezed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gaussian
from ._parallel import ordered_map
from .components import (
    PHASE_KINDS,
    Cavity,
    Component,
    Coupler,
    Gouy,
    Loss,
    Phase,
    Squeezer,
    component_from_dict,
)
from .errors import ConfigError, InvalidArgument
from .gaussian import HomodyneResult, SpectralState

SCHEMA_VERSION = 1
READOUTS = ("optimal", "squeezed")
HOM_POLICIES = ("shared", "refreshed")
PHASE_POSITIONS = ("after", "before")

SLICE_HZ = 3.75e6


def default_frequency_grid() -> tuple:
    """201 points from 0 to 10 MHz, in rad/s."""
    return tuple(2 * np.pi * np.linspace(0.0, 10e6, 201))


@dataclass(frozen=True)
class ModeSpec:
    label: str
    order: int = 0


@dataclass(frozen=True)
class InputSpec:
    mode: str
    r: float
    angle: float = 0.0


@dataclass(frozen=True)
class NetworkSpec:
    modes: tuple
    components: tuple
    readout_mode: str
    input: InputSpec
    external_loss: float = 0.0
    frequency_grid: tuple = (0.0,)
    sweep_component: int | None = None
    name: str = ""

    def __post_init__(self):
        modes = tuple(m if isinstance(m, ModeSpec) else ModeSpec(*m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "frequency_grid", tuple(float(w) for w in self.frequency_grid))
        if not modes:
            raise ConfigError("network needs at least one mode")
        labels = [m.label for m in modes]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate mode labels in {labels}")
        index = self.mode_index
        for name, ref in (("readout_mode", self.readout_mode), ("input.mode", self.input.mode)):
            if ref not in index:
                raise ConfigError(f"{name}: unknown mode label {ref!r}")
        if not 0.0 <= self.external_loss <= 1.0:
            raise ConfigError(f"external_loss must lie in [0, 1], got {self.external_loss}")
        for pos, comp in enumerate(self.components):
            if not isinstance(comp, Component):
                raise ConfigError(f"components[{pos}] is not a Component")
            refs = comp.modes if isinstance(comp, Coupler) else (comp.mode,)
            for ref in refs:
                if isinstance(ref, str) and ref not in index:
                    raise ConfigError(f"components[{pos}] ({comp.kind}): unknown mode label {ref!r}")
                if not isinstance(ref, str) and not 0 <= int(ref) < len(modes):
                    raise ConfigError(f"components[{pos}] ({comp.kind}): mode index {ref} out of range")
        if self.sweep_component is not None:
            if not 0 <= self.sweep_component < len(self.components):
                raise ConfigError(f"sweep_component {self.sweep_component} out of range")
            kind = self.components[self.sweep_component].kind
            if kind not in PHASE_KINDS + ("cavity",):
                raise ConfigError(f"sweep_component must be a phase, gouy or cavity element, got {kind}")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def mode_index(self) -> dict:
        return {m.label: i for i, m in enumerate(self.modes)}

    @property
    def readout_index(self) -> int:
        return self.mode_index[self.readout_mode]

    @property
    def input_variance(self) -> float:
        """Squeezed-quadrature variance injected at the input."""
        return float(np.exp(-2.0 * self.input.r))

    def with_input_r(self, r: float) -> "NetworkSpec":
        return replace(self, input=replace(self.input, r=float(r)))

    def with_component(self, index: int, comp: Component) -> "NetworkSpec":
        comps = list(self.components)
        comps[index] = comp
        return replace(self, components=tuple(comps))

    def with_phase(self, phi: float, index: int | None = None) -> "NetworkSpec":
        """Set the phase of a Phase/Gouy element, or the carrier reflection phase of a cavity."""
        idx = self.sweep_component if index is None else index
        if idx is None:
            raise ConfigError("network has no sweep_component; pass an explicit index")
        comp = self.components[idx]
        if isinstance(comp, Phase):
            new = comp.replace(phi=float(phi))
        elif isinstance(comp, Gouy):
            new = comp.replace(psi=float(phi) / comp.mode_order if comp.mode_order else comp.psi)
        elif isinstance(comp, Cavity) and comp.resonant:
            new = comp.with_carrier_phase(float(phi))
        else:
            raise ConfigError(f"component {idx} ({comp.kind}) has no tunable phase")
        return self.with_component(idx, new)

    def with_phases(self, phis: Sequence[float], indices: Sequence[int]) -> "NetworkSpec":
        net = self
        for phi, idx in zip(phis, indices):
            net = net.with_phase(phi, idx)
        return net

    def phase_of(self, index: int) -> float:
        comp = self.components[index]
        if isinstance(comp, Phase):
            return comp.phi
        if isinstance(comp, Gouy):
            return comp.psi * comp.mode_order
        if isinstance(comp, Cavity):
            return comp.carrier_phase
        raise ConfigError(f"component {index} ({comp.kind}) has no tunable phase")

    def differential_phase(self, fm: str | None = None, hom: str | None = None) -> float:
        """Carrier (DC) phase of the HOM relative to the FM between the outer couplers.

        Counts Phase/Gouy rotations and cavity carrier reflection phases that
        sit between the first and the last coupler. Defaults to the readout
        mode as FM and the first other mode as HOM.
        """
        fm_idx, hom_idx = self._fm_hom(fm, hom)
        coupler_pos = [i for i, c in enumerate(self.components) if isinstance(c, Coupler)]
        if len(coupler_pos) < 2:
            raise ConfigError("differential phase needs at least two couplers")
        index = self.mode_index
        total = 0.0
        for comp in self.components[coupler_pos[0] + 1 : coupler_pos[-1]]:
            if not isinstance(comp, (Phase, Gouy, Cavity)):
                continue
            ref = comp.mode
            idx = index[ref] if isinstance(ref, str) else int(ref)
            sign = 1.0 if idx == hom_idx else -1.0 if idx == fm_idx else 0.0
            if isinstance(comp, Cavity):
                total += sign * comp.carrier_phase
            elif isinstance(comp, Gouy):
                total += sign * comp.psi * comp.mode_order
            else:
                total += sign * comp.phi
        return float(total)

    def with_differential_phase(self, phi: float, fm: str | None = None, hom: str | None = None):
        """Retune the sweep component so :meth:`differential_phase` equals ``phi``."""
        if self.sweep_component is None:
            raise ConfigError("network has no sweep_component")
        current = self.differential_phase(fm, hom)
        comp_phase = self.phase_of(self.sweep_component)
        ref = self.components[self.sweep_component].mode
        idx = self.mode_index[ref] if isinstance(ref, str) else int(ref)
        fm_idx, _ = self._fm_hom(fm, hom)
        sign = -1.0 if idx == fm_idx else 1.0
        return self.with_phase(comp_phase + sign * (phi - current))

    def _fm_hom(self, fm, hom):
        index = self.mode_index
        fm_idx = index[fm] if fm is not None else self.readout_index
        if hom is not None:
            hom_idx = index[hom]
        else:
            others = [i for i in range(self.n_modes) if i != fm_idx]
            if not others:
                raise ConfigError("network has a single mode")
            hom_idx = others[0]
        return fm_idx, hom_idx

    def geometric_mismatch(self) -> float:
        """Power lost if every coupler acted as an independent loss."""
        keep = 1.0
        for comp in self.components:
            if isinstance(comp, Coupler):
                keep *= 1.0 - comp.epsilon
        return 1.0 - keep

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "type": "network",
            "name": self.name,
            "modes": [{"label": m.label, "order": m.order} for m in self.modes],
            "input": {"mode": self.input.mode, "r": self.input.r, "angle": self.input.angle},
            "components": [c.to_dict() for c in self.components],
            "readout_mode": self.readout_mode,
            "external_loss": self.external_loss,
            "frequency_grid": list(self.frequency_grid),
        }
        if self.sweep_component is not None:
            out["sweep_component"] = self.sweep_component
        return out


@dataclass(frozen=True)
class ChainSpec:
    """``n_nodes`` identical cells of ``coupler(eps)`` and HOM phase ``phi``.

    ``phi`` is either one common phase or one value per node. With the
    ``shared`` policy a single HOM threads through every node; ``refreshed``
    gives each node its own vacuum HOM.
    """

    n_nodes: int
    eps: float
    phi: float | tuple = 0.0
    r_in: float = 0.0
    hom_policy: str = "shared"
    phase_position: str = "after"
    readout: str = "squeezed"

    def __post_init__(self):
        if int(self.n_nodes) < 0:
            raise ConfigError(f"n_nodes must be >= 0, got {self.n_nodes}")
        if not 0.0 <= self.eps < 1.0:
            raise ConfigError(f"eps must lie in [0, 1), got {self.eps}")
        if self.hom_policy not in HOM_POLICIES:
            raise ConfigError(f"hom_policy must be one of {HOM_POLICIES}, got {self.hom_policy!r}")
        if self.phase_position not in PHASE_POSITIONS:
            raise ConfigError(f"phase_position must be one of {PHASE_POSITIONS}")
        if self.readout not in READOUTS:
            raise ConfigError(f"readout must be one of {READOUTS}, got {self.readout!r}")
        if not np.isscalar(self.phi):
            phis = tuple(float(p) for p in self.phi)
            if len(phis) != self.n_nodes:
                raise ConfigError(f"phi list has {len(phis)} entries for {self.n_nodes} nodes")
            object.__setattr__(self, "phi", phis)
        else:
            object.__setattr__(self, "phi", float(self.phi))

    def node_phases(self) -> tuple:
        if isinstance(self.phi, tuple):
            return self.phi
        return (self.phi,) * self.n_nodes

    def with_phase(self, phi: float) -> "ChainSpec":
        return replace(self, phi=float(phi))

    def to_network(self) -> NetworkSpec:
        return chain_network(self)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "type": "chain",
            "n_nodes": self.n_nodes,
            "eps": self.eps,
            "phi": list(self.phi) if isinstance(self.phi, tuple) else self.phi,
            "r_in": self.r_in,
            "hom_policy": self.hom_policy,
            "phase_position": self.phase_position,
            "readout": self.readout,
        }


def mz_network(
    eps1: float,
    eps2: float,
    phi: float,
    r: float = 0.0,
    external_loss: float = 0.0,
    angle: float = 0.0,
) -> NetworkSpec:
    """Two couplers with the HOM phase ``phi`` between them (sweep_component = 1)."""
    return NetworkSpec(
        modes=(ModeSpec("FM", 0), ModeSpec("HOM", 1)),
        components=(
            Coupler(eps1, ("FM", "HOM")),
            Phase(phi, "HOM"),
            Coupler(eps2, ("FM", "HOM")),
        ),
        readout_mode="FM",
        input=InputSpec("FM", r, angle),
        external_loss=external_loss,
        sweep_component=1,
        name="mach-zehnder",
    )


def chain_network(c: ChainSpec) -> NetworkSpec:
    shared = c.hom_policy == "shared"
    n_hom = 1 if shared else max(c.n_nodes, 1)
    hom_labels = ["HOM"] if shared else [f"HOM{i}" for i in range(n_hom)]
    modes = [ModeSpec("FM", 0)] + [ModeSpec(h, 1) for h in hom_labels]
    comps: list = []
    for node, phi in enumerate(c.node_phases()):
        hom = hom_labels[0 if shared else node]
        cell = [Coupler(c.eps, ("FM", hom)), Phase(phi, hom)]
        comps.extend(cell if c.phase_position == "after" else cell[::-1])
    return NetworkSpec(
        modes=tuple(modes),
        components=tuple(comps),
        readout_mode="FM",
        input=InputSpec("FM", c.r_in, 0.0),
        name=f"chain-{c.hom_policy}",
    )


def evaluate(net: NetworkSpec, omega: float = 0.0) -> SpectralState:
    """Output state of the whole network at sideband frequency ``omega``."""
    index = net.mode_index
    state = gaussian.vacuum_state(net.n_modes, omega)
    if net.input.r:
        state = gaussian.squeeze(state, index[net.input.mode], net.input.r, net.input.angle)
    for comp in net.components:
        state = comp.apply(state, index)
    if net.external_loss:
        state = gaussian.add_loss(state, net.readout_index, net.external_loss)
    return state


def evaluate_homodyne(net: NetworkSpec, omega: float = 0.0) -> HomodyneResult:
    return gaussian.min_max_variance(evaluate(net, omega), net.readout_index)


def readout_variance(net: NetworkSpec, omega: float = 0.0, readout: str = "optimal") -> float:
    """Readout-mode noise relative to shot noise for the chosen homodyne policy."""
    state = evaluate(net, omega)
    if readout == "optimal":
        return gaussian.min_max_variance(state, net.readout_index).v_min
    if readout == "squeezed":
        return gaussian.quadrature_variance(state, net.readout_index, net.input.angle)
    raise InvalidArgument(f"readout must be one of {READOUTS}, got {readout!r}")


def homodyne_spectrum(net: NetworkSpec) -> list:
    """Optimal-angle homodyne statistics at every frequency of the grid."""
    if not net.frequency_grid:
        raise ConfigError("network has an empty frequency grid")
    return ordered_map(lambda w: evaluate_homodyne(net, w), net.frequency_grid)


def cold_throughput(net: NetworkSpec) -> float:
    """Fractional carrier power lost by a unit coherent probe in the input mode.

    The probe sees every component at DC except squeezers, and the external
    loss.
    """
    index = net.mode_index
    state = gaussian.vacuum_state(net.n_modes, 0.0)
    mean = np.zeros(2 * net.n_modes)
    mean[2 * index[net.input.mode]] = 1.0
    state = SpectralState(state.cov, mean, 0.0)
    for comp in net.components:
        if isinstance(comp, Squeezer):
            continue
        state = comp.apply(state, index)
    if net.external_loss:
        state = gaussian.add_loss(state, net.readout_index, net.external_loss)
    ro = net.readout_index
    power = float(np.sum(state.mean[2 * ro : 2 * ro + 2] ** 2))
    return float(min(1.0, max(0.0, 1.0 - power)))


def chain_variance(c: ChainSpec, readout: str | None = None) -> float:
    return readout_variance(chain_network(c), 0.0, readout or c.readout)


def chain_evaluate(c: ChainSpec, readout: str | None = None) -> float:
    """Output squeezing in dB below shot noise (negative for excess noise)."""
    return gaussian.variance_to_db(chain_variance(c, readout))


def incoherent_loss(n_nodes: int, eps: float) -> float:
    return 1.0 - (1.0 - eps) ** n_nodes


def incoherent_baseline(n_nodes: int, eps: float, r_in: float) -> float:
    """Output squeezing (dB) if each node's mismatch were an independent loss."""
    if n_nodes < 0 or not 0.0 <= eps < 1.0:
        raise InvalidArgument("need n_nodes >= 0 and eps in [0, 1)")
    lam = incoherent_loss(n_nodes, eps)
    v = (1.0 - lam) * np.exp(-2.0 * r_in) + lam
    return gaussian.variance_to_db(v)


def network_baseline_variance(net: NetworkSpec) -> float:
    """Readout variance if all couplers and the external loss were incoherent losses."""
    lam = 1.0 - (1.0 - net.geometric_mismatch()) * (1.0 - net.external_loss)
    return (1.0 - lam) * net.input_variance + lam


# --------------------------------------------------------------------------
# serialization


def _frequency_grid_from(data) -> tuple:
    if isinstance(data, dict):
        unknown = set(data) - {"start", "stop", "num", "unit"}
        if unknown:
            raise ConfigError(f"frequency_grid: unknown field(s) {sorted(unknown)}")
        unit = data.get("unit", "Hz")
        if unit not in ("Hz", "rad/s"):
            raise ConfigError(f"frequency_grid.unit must be 'Hz' or 'rad/s', got {unit!r}")
        try:
            grid = np.linspace(float(data["start"]), float(data["stop"]), int(data["num"]))
        except KeyError as exc:
            raise ConfigError(f"frequency_grid: missing field {exc.args[0]!r}") from exc
        return tuple(grid * (2 * np.pi if unit == "Hz" else 1.0))
    if isinstance(data, (int, float)):
        return (float(data),)
    return tuple(float(w) for w in data)


_NETWORK_KEYS = {
    "schema", "type", "name", "modes", "input", "components", "readout_mode",
    "external_loss", "frequency_grid", "sweep_component",
}
_CHAIN_KEYS = {"schema", "type", *ChainSpec.__dataclass_fields__}


def _check_schema(data: dict) -> None:
    if not isinstance(data, dict):
        raise ConfigError("spec document must be a mapping")
    if data.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {SCHEMA_VERSION}, got {data.get('schema')!r}")


def network_from_dict(data: dict) -> NetworkSpec:
    _check_schema(data)
    unknown = set(data) - _NETWORK_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    for key in ("modes", "input", "components", "readout_mode"):
        if key not in data:
            raise ConfigError(f"missing required field {key!r}")
    modes = []
    for pos, m in enumerate(data["modes"]):
        if isinstance(m, str):
            modes.append(ModeSpec(m, 0))
        elif isinstance(m, dict) and "label" in m:
            modes.append(ModeSpec(str(m["label"]), int(m.get("order", 0))))
        else:
            raise ConfigError(f"modes[{pos}]: expected a label or {{label, order}}")
    inp = data["input"]
    if not isinstance(inp, dict) or "mode" not in inp:
        raise ConfigError("input: expected {mode, r | sqz_db, angle}")
    if "sqz_db" in inp:
        r = gaussian.db_to_r(float(inp["sqz_db"]))
    else:
        r = float(inp.get("r", 0.0))
    comps = []
    for pos, comp in enumerate(data["components"]):
        try:
            comps.append(component_from_dict(comp))
        except (ConfigError, InvalidArgument) as exc:
            raise ConfigError(f"components[{pos}]: {exc}") from exc
    return NetworkSpec(
        modes=tuple(modes),
        components=tuple(comps),
        readout_mode=str(data["readout_mode"]),
        input=InputSpec(str(inp["mode"]), r, float(inp.get("angle", 0.0))),
        external_loss=float(data.get("external_loss", 0.0)),
        frequency_grid=_frequency_grid_from(data.get("frequency_grid", [0.0])),
        sweep_component=data.get("sweep_component"),
        name=str(data.get("name", "")),
    )


def chain_from_dict(data: dict) -> ChainSpec:
    _check_schema(data)
    unknown = set(data) - _CHAIN_KEYS - {"sqz_db"}
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    params = {k: v for k, v in data.items() if k in ChainSpec.__dataclass_fields__}
    if "sqz_db" in data:
        params["r_in"] = gaussian.db_to_r(float(data["sqz_db"]))
    for key in ("n_nodes", "eps"):
        if key not in params:
            raise ConfigError(f"missing required field {key!r}")
    return ChainSpec(**params)


def spec_from_dict(data: dict):
    _check_schema(data)
    kind = data.get("type", "network")
    if kind == "network":
        return network_from_dict(data)
    if kind == "chain":
        return chain_from_dict(data)
    raise ConfigError(f"type: expected 'network' or 'chain', got {kind!r}")


def load_spec(path):
    """Read a schema-1 JSON document describing a network or a chain."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return spec_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dump_spec(spec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
