"""Adaptive Bayesian optimization with expanding GP hyperparameter classes."""

from .algorithms import (
    AlgorithmConfig,
    Domain,
    RunTrace,
    maximize_ucb,
    run,
    run_agp_ucb,
    run_fixed_gp_ucb,
    run_wang_shrink,
)
from .confidence import ConfidenceParams, beta_sqrt, confidence_interval
from .gp import GaussianProcess
from .kernels import KernelSpec, evaluate, gram_matrix, rkhs_norm_of_expansion
from .objectives import (
    ObjectiveSpec,
    bump_linear_preset,
    evaluate_objective,
    make_gp_sample_function,
    make_rkhs_function,
    regret_metrics,
)

__all__ = [
    "AlgorithmConfig",
    "ConfidenceParams",
    "Domain",
    "GaussianProcess",
    "KernelSpec",
    "ObjectiveSpec",
    "RunTrace",
    "beta_sqrt",
    "bump_linear_preset",
    "confidence_interval",
    "evaluate",
    "evaluate_objective",
    "gram_matrix",
    "make_gp_sample_function",
    "make_rkhs_function",
    "maximize_ucb",
    "regret_metrics",
    "rkhs_norm_of_expansion",
    "run",
    "run_agp_ucb",
    "run_fixed_gp_ucb",
    "run_wang_shrink",
]

__version__ = "0.1.0"
