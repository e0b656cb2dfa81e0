"""Squeezed-light degradation from coherent mixing with higher-order spatial modes.

Spectral Gaussian states, optical components, the closed-form two-coupler
model, network composition and evaluation, sweeps and maps, and a phase
optimizer.
"""

from .analysis import (
    PhaseMap,
    RecoveryReport,
    SweepResult,
    fraction_below_threshold,
    hyperloss_map,
    hyperloss_region,
    mismatch_sweep,
    phase_sweep,
    recovery_report,
)
from .closedform import (
    MzParams,
    cold_loss_exact,
    cold_loss_smallk,
    effective_channel,
    hot_variance,
    hot_variance_weak,
    is_hyperloss,
)
from .components import Cavity, Coupler, Gouy, Loss, Phase, Squeezer
from .errors import (
    BudgetExceeded,
    ConfigError,
    HyperlossError,
    InvalidArgument,
    InvalidProblem,
    InvalidState,
)
from .gaussian import (
    HomodyneResult,
    SpectralState,
    add_loss,
    apply_transfer,
    min_max_variance,
    purity,
    quadrature_variance,
    squeeze,
    vacuum_state,
)
from .network import (
    ChainSpec,
    InputSpec,
    ModeSpec,
    NetworkSpec,
    chain_evaluate,
    chain_network,
    evaluate,
    evaluate_homodyne,
    incoherent_baseline,
    load_spec,
    mz_network,
)
from .optimizer import OptProblem, OptResult, optimize_phases, robustness

__version__ = "0.1.0"
