"""Regression quantiles and regression rank scores, with the extreme quantile
averaged over the design computed along independent routes that are checked
against one another."""

__version__ = "0.1.0"

from .averaged import (
    AerqReport,
    aerq_via_restimator,
    aerq_via_weights,
    averaged_rq,
    shortfall,
    verify_identities,
)
from .core import (
    AerqError,
    BaseWeights,
    Dataset,
    DatasetError,
    DegeneracyError,
    DegeneracyWarning,
    NumericalError,
    QuantileFit,
    Tolerances,
    solve_square_system,
    validate_dataset,
)
from .rankscores import averaged_rq_via_scores, derivative_at_one, hajek_scores, solve_rank_scores
from .restimator import assemble_extended, dispersion, fit_r_estimator
from .rq import extract_base, fit_extreme_rq, fit_quantile, fit_rq
from .simplex import certify_solution, make_lp, solve_lp

__all__ = [
    "AerqError", "AerqReport", "BaseWeights", "Dataset", "DatasetError", "DegeneracyError",
    "DegeneracyWarning", "NumericalError", "QuantileFit", "Tolerances",
    "aerq_via_restimator", "aerq_via_weights", "assemble_extended", "averaged_rq",
    "averaged_rq_via_scores", "certify_solution", "derivative_at_one", "dispersion",
    "extract_base", "fit_extreme_rq", "fit_quantile", "fit_r_estimator", "fit_rq",
    "hajek_scores", "make_lp", "shortfall", "solve_lp", "solve_rank_scores",
    "solve_square_system", "validate_dataset", "verify_identities",
]
