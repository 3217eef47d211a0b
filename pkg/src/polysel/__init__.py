"""Bayesian variable selection over heredity-constrained polynomial model spaces."""

__version__ = "0.1.0"

from .estimators import (
    PosteriorTable,
    frequency,
    inclusion_probabilities,
    model_average_predict,
    rank_of,
    renormalize,
    summarize,
    tvd,
    with_prior,
)
from .marginals import (
    Dataset,
    GPriorEvaluator,
    MarginalCache,
    PluginEvaluator,
    build_design,
    directed_distance,
    load_csv,
    log_marginal,
)
from .priors import HyperScheme, PriorFamily, PriorSpec, log_prior, sample_model
from .sampler import SamplerConfig, run
from .space import (
    CapExceeded,
    Heredity,
    Model,
    ModelSpace,
    count_quadratic_space,
    export_dot,
)

__all__ = [
    "CapExceeded",
    "Dataset",
    "GPriorEvaluator",
    "Heredity",
    "HyperScheme",
    "MarginalCache",
    "Model",
    "ModelSpace",
    "PluginEvaluator",
    "PosteriorTable",
    "PriorFamily",
    "PriorSpec",
    "SamplerConfig",
    "build_design",
    "count_quadratic_space",
    "directed_distance",
    "export_dot",
    "frequency",
    "inclusion_probabilities",
    "load_csv",
    "log_marginal",
    "log_prior",
    "model_average_predict",
    "rank_of",
    "renormalize",
    "run",
    "sample_model",
    "summarize",
    "tvd",
    "with_prior",
]
