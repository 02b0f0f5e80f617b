"""Exit-time and escape-probability computations for 1-D dynamics driven by
Brownian and symmetric alpha-stable noise."""

from .config import ConfigError, RunConfig, resolve_run
from .levy import NoiseParams, characteristic_exponent, jump_density, stable_constant
from .mc import (
    McEstimate,
    SimConfig,
    empirical_cf_check,
    mc_escape_probability,
    mc_mean_exit_time,
    simulate_exit,
)
from .model import (
    ModelParams,
    RegimeError,
    ScalingParams,
    SteadyStates,
    drift,
    is_bistable,
    nondimensionalize,
    potential,
    steady_states,
    zero_drift,
)
from .solver import (
    EscapeTarget,
    Grid,
    GridError,
    QualityWarning,
    SingularMatrixError,
    SolutionField,
    build_grid,
    escape_probability,
    mean_exit_time,
    observed_order,
)

__version__ = "0.1.0"
