from chen_holonomy.exactnum.matrix import SparseMatrix, rational_inverse
from chen_holonomy.exactnum.poly import (
    MultiPoly,
    Rational,
    format_rational,
    parse_rational,
)

__all__ = [
    "MultiPoly",
    "Rational",
    "SparseMatrix",
    "format_rational",
    "parse_rational",
    "rational_inverse",
]
