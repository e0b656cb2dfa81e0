"""Ready-made networks matching the two-cavity demonstration and the chain study.

The demonstration's cavity linewidths and detunings were never published,
so the two-cavity builders take them as arguments. The ``EXP_*`` presets
fix them to one shared choice (both linewidths ``2*pi*10 MHz``), which
differ between regimes only in the first cavity's detuning set-point:
on resonance for recovery, a quarter-turn carrier phase for hyperloss.
"""

from __future__ import annotations

import numpy as np

from . import gaussian
from .components import Cavity, Coupler, Phase
from .network import SLICE_HZ, InputSpec, ModeSpec, NetworkSpec, default_frequency_grid

EXP_MISMATCH = 0.08
EXP_EXTERNAL_LOSS = 0.263
EXP_ANTISQUEEZING_DB = 24.0
EXP_LINEWIDTH = 2 * np.pi * 10e6
SLICE_OMEGA = 2 * np.pi * SLICE_HZ

CHAIN_INPUT_DB = 15.0
CHAIN_NODES = 10
CHAIN_THRESHOLD_DB = 10.0
# incoherent-model outputs quoted for the chain study (not reproduced by a
# per-node (1 - eps) loss model; reported alongside, never asserted)
QUOTED_BASELINE_DB = {0.01: 10.2, 0.02: 7.4}


def r_for_readout_antisqueezing(antisq_db: float, external_loss: float) -> float:
    """Input squeeze parameter giving ``antisq_db`` at a detector behind ``external_loss``."""
    anti = 10.0 ** (antisq_db / 10.0)
    return 0.5 * np.log((anti - external_loss) / (1.0 - external_loss))


def two_cavity_network(
    eps1: float,
    eps2: float,
    gamma1: float,
    gamma2: float,
    delta1: float = 0.0,
    delta2: float = 0.0,
    gouy: float = 0.0,
    r: float = 0.0,
    external_loss: float = 0.0,
    frequency_grid=None,
    name: str = "two-cavity",
) -> NetworkSpec:
    """FM reflected off two overcoupled cavities with a HOM living between them.

    The FM resonates in both cavities; the HOM resonates in neither and picks
    up a sign flip per reflection. The HOM propagation phase ``gouy`` is the
    sweep component.
    """
    return NetworkSpec(
        modes=(ModeSpec("FM", 0), ModeSpec("HOM", 1)),
        components=(
            Coupler(eps1, ("FM", "HOM")),
            Cavity(delta1, gamma1, "FM", True),
            Cavity(0.0, gamma1, "HOM", False),
            Phase(gouy, "HOM"),
            Cavity(delta2, gamma2, "FM", True),
            Cavity(0.0, gamma2, "HOM", False),
            Coupler(eps2, ("FM", "HOM")),
        ),
        readout_mode="FM",
        input=InputSpec("FM", r, 0.0),
        external_loss=external_loss,
        frequency_grid=default_frequency_grid() if frequency_grid is None else frequency_grid,
        sweep_component=3,
        name=name,
    )


def _experiment_two_cavity(delta1: float, name: str) -> NetworkSpec:
    r = r_for_readout_antisqueezing(EXP_ANTISQUEEZING_DB, EXP_EXTERNAL_LOSS)
    return two_cavity_network(
        EXP_MISMATCH,
        EXP_MISMATCH,
        EXP_LINEWIDTH,
        EXP_LINEWIDTH,
        delta1=delta1,
        r=r,
        external_loss=EXP_EXTERNAL_LOSS,
        name=name,
    )


def experiment_hyperloss_network(diff_phase: float = np.pi / 2) -> NetworkSpec:
    net = _experiment_two_cavity(0.5 * EXP_LINEWIDTH, "experiment-hyperloss")
    return net.with_differential_phase(diff_phase)


def experiment_recovery_network(diff_phase: float = np.pi) -> NetworkSpec:
    net = _experiment_two_cavity(0.0, "experiment-recovery")
    return net.with_differential_phase(diff_phase)


def experiment_mz_network(phi: float = np.pi / 2):
    """Frequency-flat cell with the demonstration's mismatch, loss and anti-squeezing."""
    from .network import mz_network

    r = r_for_readout_antisqueezing(EXP_ANTISQUEEZING_DB, EXP_EXTERNAL_LOSS)
    return mz_network(EXP_MISMATCH, EXP_MISMATCH, phi, r=r, external_loss=EXP_EXTERNAL_LOSS)


def chain_r_in(db: float = CHAIN_INPUT_DB) -> float:
    return gaussian.db_to_r(db)
