"""Growth invariants, minimum-modulus checks and escape-time dynamics for entire functions."""

__version__ = "0.1.0"

from .errors import (EvaluationFailed, FitRejected, GrowthError, InsufficientExponents, InsufficientSamples,
                     NotFound, NotSatisfiedOnGrid, SeedTooSmall, TruncationUnavailable,
                     UndefinedForZeroLowerOrder, UndefinedForZeroOrder)
from .evaluation import eval_log, eval_point, truncation_index
from .invariants import (Grid, GrowthProfile, classify_corollary, estimate_order, estimate_type,
                         growth_exponents, growth_profile, max_modulus, max_term, min_modulus)
from .logdomain import LogComplex, LogScalar
from .series import (BakerSeries, CoefficientSeries, CosSqrtSeries, ExpSeries, GapSquaresSeries, Polynomial,
                     constant, monomial, parse_function)

__all__ = [
    "__version__",
    "BakerSeries", "CoefficientSeries", "CosSqrtSeries", "ExpSeries", "GapSquaresSeries", "Polynomial",
    "constant", "monomial", "parse_function",
    "LogComplex", "LogScalar",
    "eval_log", "eval_point", "truncation_index",
    "Grid", "GrowthProfile", "classify_corollary", "estimate_order", "estimate_type", "growth_exponents",
    "growth_profile", "max_modulus", "max_term", "min_modulus",
    "EvaluationFailed", "FitRejected", "GrowthError", "InsufficientExponents", "InsufficientSamples",
    "NotFound", "NotSatisfiedOnGrid", "SeedTooSmall", "TruncationUnavailable",
    "UndefinedForZeroLowerOrder", "UndefinedForZeroOrder",
]
