"""relikit: adaptive-Kriging reliability analysis with error-rate control."""

from .benchmarks import BENCHMARKS, get_benchmark
from .config import PRESETS, ConfigError, RunConfig, parse_config, validate_config
from .distributions import Marginal, RandomVector, SampleMatrix, lhs_sample, plain_sample
from .engines import (
    DesignPool,
    EngineConfig,
    RunReport,
    cov_of_pf,
    crude_mcs,
    run_ak_mcs,
    run_engine,
    run_iskra,
    run_reak,
    true_error_vs_oracle,
)
from .error_bound import (
    ErrorBound,
    EsrPartition,
    WrongSignCounts,
    build_partition,
    max_error_rate,
    poisson_binomial_quantile,
    safe_wse_interval,
)
from .evaluators import EvaluatorError, LimitState, SubprocessEvaluator
from .harness import compare_methods, run_single, run_sweep
from .kernels import backend_name
from .kriging import (
    DuplicateTrainingPointError,
    IllConditionedModelError,
    KrigingModel,
    Prediction,
    fit_with_theta,
    gaussian_correlation,
    log_psi,
    mle_fit,
    profile_beta_sigma2,
)
from .learning import AcquisitionScores, eff, select_next, u_score, wrong_sign_prob

__version__ = "0.1.0"

__all__ = [
    "BENCHMARKS",
    "PRESETS",
    "AcquisitionScores",
    "ConfigError",
    "DesignPool",
    "DuplicateTrainingPointError",
    "EngineConfig",
    "ErrorBound",
    "EsrPartition",
    "EvaluatorError",
    "IllConditionedModelError",
    "KrigingModel",
    "LimitState",
    "Marginal",
    "Prediction",
    "RandomVector",
    "RunConfig",
    "RunReport",
    "SampleMatrix",
    "SubprocessEvaluator",
    "WrongSignCounts",
    "backend_name",
    "build_partition",
    "compare_methods",
    "cov_of_pf",
    "crude_mcs",
    "eff",
    "fit_with_theta",
    "gaussian_correlation",
    "get_benchmark",
    "lhs_sample",
    "log_psi",
    "max_error_rate",
    "mle_fit",
    "parse_config",
    "plain_sample",
    "poisson_binomial_quantile",
    "profile_beta_sigma2",
    "run_ak_mcs",
    "run_engine",
    "run_iskra",
    "run_reak",
    "run_single",
    "run_sweep",
    "safe_wse_interval",
    "select_next",
    "true_error_vs_oracle",
    "u_score",
    "validate_config",
    "wrong_sign_prob",
]
