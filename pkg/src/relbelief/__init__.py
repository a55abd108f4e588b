"""Relative belief tests for a normal mean.

Bayesian counterparts of the one-sample z- and t-tests: prior elicitation,
closed-form and distance-based relative belief ratios with their strengths,
prior-data conflict and bias diagnostics, and the classical tests for
comparison.
"""

__version__ = "0.1.0"

from .baselines import ClassicalResult, t_test, z_test
from .config import ConfigError, RunConfig, load_config, parse_config
from .diagnostics import (
    BiasReport,
    ConflictResult,
    bias_against,
    bias_in_favor,
    conflict_known_variance,
    conflict_unknown_variance,
)
from .model import (
    DataSummary,
    ElicitationInput,
    Hyperparameters,
    PosteriorSpec,
    Variant,
    elicit_known_variance,
    elicit_unknown_variance,
    posterior_known_variance,
    posterior_unknown_variance,
)
from .numerics import ConvergenceError, DomainError, RandomStream
from .pipeline import run_pipeline
from .rb import (
    Evidence,
    KLTestConfig,
    RBResult,
    direct_rb_known,
    direct_rb_unknown,
    direct_strength_known,
    direct_strength_unknown,
    run_kl_rb_test,
)
from .report import Report, emit_report
