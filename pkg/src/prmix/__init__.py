"""prmix: anytime-valid sequential testing with recursively fitted
nonparametric mixture likelihoods.

The evidence process divides a one-pass mixture marginal likelihood by
the maximized likelihood over the null class; Ville's inequality then
gives stopping-rule-uniform error control.
"""

from ._backend import BACKEND
from .engine import PrState, WeightSchedule, pr_update
from .eprocess import (
    EProcessRecord,
    EProcessRun,
    anytime_p,
    run_stream,
    test_at_level,
)
from .errors import (
    AbsoluteContinuityViolation,
    ConfigError,
    DegenerateNull,
    InsufficientCheckpoints,
    NumericalDegeneracy,
    OracleSizeExceeded,
    PrmixError,
    SolverDidNotConverge,
    UnsupportedObservation,
)
from .kernels import GAMMA, GAUSSIAN, KernelFamily, log_density
from .kl import GrowthRateReport, growth_rate, kl_quadrature
from .mixing import IndexGrid, MixingState, mixture_log_density, uniform_init
from .null_models import (
    GaussianNull,
    LogConcaveNull,
    MonotoneNull,
    NullFit,
    SimpleNull,
    gaussian_null_loglik,
    grenander_loglik,
    logconcave_loglik,
    make_null_model,
    simple_null_loglik,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PrState",
    "WeightSchedule",
    "pr_update",
    "EProcessRecord",
    "EProcessRun",
    "anytime_p",
    "run_stream",
    "test_at_level",
    "KernelFamily",
    "GAUSSIAN",
    "GAMMA",
    "log_density",
    "IndexGrid",
    "MixingState",
    "uniform_init",
    "mixture_log_density",
    "GrowthRateReport",
    "growth_rate",
    "kl_quadrature",
    "NullFit",
    "SimpleNull",
    "GaussianNull",
    "MonotoneNull",
    "LogConcaveNull",
    "gaussian_null_loglik",
    "grenander_loglik",
    "logconcave_loglik",
    "simple_null_loglik",
    "make_null_model",
    "PrmixError",
    "ConfigError",
    "UnsupportedObservation",
    "NumericalDegeneracy",
    "DegenerateNull",
    "SolverDidNotConverge",
    "AbsoluteContinuityViolation",
    "InsufficientCheckpoints",
    "OracleSizeExceeded",
]
