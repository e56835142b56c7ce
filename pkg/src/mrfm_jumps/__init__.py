"""Monte Carlo model of single-spin quantum jumps in OSCAR MRFM."""

__version__ = "0.1.0"

from .correlation import autocorrelation, fit_exponential, sign_signal
from .dynamics import (
    EffectiveField,
    JumpTrace,
    PhaseState,
    ct_position,
    effective_field,
    jump_probability,
    simulate_run,
)
from .errors import ConfigError, InsufficientDataError
from .noise import KickEvent, TelegraphConfig, next_kick, value_at
from .stats import build_histogram, fit_peak_envelope, interval_moments
from .sweep import ScalingFit, SweepGrid, fit_scaling, predict_physical_time, run_sweep
from .units import (
    ModelParams,
    PhysicalParams,
    dimensionless_time_to_seconds,
    quantum_units,
    to_dimensionless,
)
