"""Count the tangent lines of a function's graph passing through a point."""

__version__ = "0.1.0"

from .convexity import ExpPolynomial, NoCertificateError, RationalFunction, analyze, theorem_verdict
from .engine import IlluminationResult, OnGraphError, QueryPoint, illumination_index
from .exactpoly import Polynomial, multiple_tangent_lines
from .expr import EvaluationError, ParseError, parse
from .function import Function
from .thetalines import count_normals, count_theta_lines, nearest_point

__all__ = [
    "EvaluationError",
    "ExpPolynomial",
    "Function",
    "IlluminationIndex",
    "IlluminationResult",
    "NoCertificateError",
    "OnGraphError",
    "ParseError",
    "Polynomial",
    "QueryPoint",
    "RationalFunction",
    "ThetaLineCount",
    "analyze",
    "count_normals",
    "count_theta_lines",
    "illumination_index",
    "multiple_tangent_lines",
    "nearest_point",
    "parse",
    "theorem_verdict",
]


def __getattr__(name):
    # the estimators pull in scikit-learn; load them only when asked for
    if name in ("IlluminationIndex", "ThetaLineCount"):
        from . import estimator

        return getattr(estimator, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
