"""Exact scalars: rationals, Q(sqrt(D)), p-adic valuations, dyadic intervals, heights."""

from .heights import height, height_integer, primitive_minimal_polynomial, rational_height, tuple_height
from .interval import (
    DEFAULT_PRECISION,
    DEFAULT_REFINEMENTS,
    DyadicInterval,
    decide,
    log_rational,
)
from .quadratic import (
    ComplexInterval,
    QuadExt,
    Scalar,
    arch_abs_pair,
    as_quad,
    embed,
    quad_minimal_polynomial,
    quad_valuations,
    rational_sqrt,
)
from .valuation import INF, Rational, ValOrInf, as_rational, padic_valuation, prime_divisors

__all__ = [
    "ComplexInterval",
    "DEFAULT_PRECISION",
    "DEFAULT_REFINEMENTS",
    "DyadicInterval",
    "INF",
    "QuadExt",
    "Rational",
    "Scalar",
    "ValOrInf",
    "arch_abs_pair",
    "as_quad",
    "as_rational",
    "decide",
    "embed",
    "height",
    "height_integer",
    "log_rational",
    "padic_valuation",
    "prime_divisors",
    "primitive_minimal_polynomial",
    "quad_minimal_polynomial",
    "quad_valuations",
    "rational_height",
    "rational_sqrt",
    "tuple_height",
]
