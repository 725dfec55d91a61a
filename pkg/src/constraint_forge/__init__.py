"""Exact symbolic verification of the sphere particle's constraint structure."""

from .algebra import ScalarExpr, Tensor2Expr, VectorExpr
from .brackets import dirac, poisson
from .checks import CheckReport
from .parser import ParseError, parse_expr, to_text

__all__ = [
    "CheckReport",
    "ParseError",
    "ScalarExpr",
    "Tensor2Expr",
    "VectorExpr",
    "dirac",
    "parse_expr",
    "poisson",
    "to_text",
]

__version__ = "0.1.0"
