"""Absolute logarithmic (Weil) heights of rationals, tuples and quadratic numbers."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable

from .interval import DEFAULT_PRECISION, DyadicInterval
from .quadratic import QuadExt, arch_abs_pair, quad_minimal_polynomial
from .valuation import as_rational


def height_integer(values: Iterable[Fraction]) -> int:
    """exp of the height of a rational tuple: max(L, max |L*q_i|), L = lcm of denominators."""
    values = [as_rational(q) for q in values]
    den = lcm(*(q.denominator for q in values)) if values else 1
    top = max((abs(q.numerator) * (den // q.denominator) for q in values), default=0)
    return max(den, top)


def rational_height(q, precision: int = DEFAULT_PRECISION) -> DyadicInterval:
    """h(a/b) = log max(|a|, |b|)."""
    return tuple_height([q], precision)


def tuple_height(qs, precision: int = DEFAULT_PRECISION) -> DyadicInterval:
    """Height of the affine point (q_1, ..., q_k): sum over places of log max{1, |q_i|_v}.

    Rational entries give log max(L, |L*q_i|) with L the lcm of denominators.
    Entries that are rational multiples of a common sqrt(D) have the same
    absolute value at conjugate places, so the height is half the height of
    the tuple of their norms.
    """
    qs = list(qs)
    if any(isinstance(q, QuadExt) and q.y != 0 for q in qs):
        if len(qs) == 1:
            return height(qs[0], precision)
        if not all(not isinstance(q, QuadExt) or q.is_pure for q in qs):
            raise ValueError("tuple heights need rational or pure sqrt(D) entries")
        norms = [abs(q.norm()) if isinstance(q, QuadExt) else as_rational(q) ** 2 for q in qs]
        return DyadicInterval.exact(height_integer(norms), precision).log() * Fraction(1, 2)
    rationals = [q.x if isinstance(q, QuadExt) else q for q in qs]
    return DyadicInterval.exact(height_integer(rationals), precision).log()


def primitive_minimal_polynomial(z) -> tuple[int, int, int]:
    """Coprime integers (a, b, c), a > 0, with a*T^2 + b*T + c the minimal polynomial times a."""
    t, n = quad_minimal_polynomial(z)
    den = lcm(t.denominator, n.denominator)
    a, b, c = den, int(-t * den), int(n * den)
    g = gcd(a, gcd(b, c))
    return a // g, b // g, c // g


def height(z, precision: int = DEFAULT_PRECISION) -> DyadicInterval:
    """Absolute logarithmic height of a rational or an element of Q(sqrt(D)).

    Irrational z uses the Mahler measure of its primitive minimal polynomial:
    h(z) = (log a + log max(1, |z|) + log max(1, |conj z|)) / 2.
    """
    if not isinstance(z, QuadExt) or z.y == 0:
        q = z.x if isinstance(z, QuadExt) else as_rational(z)
        return DyadicInterval.exact(max(abs(q.numerator), q.denominator), precision).log()
    a, _, _ = primitive_minimal_polynomial(z)
    one = DyadicInterval.exact(1, precision)
    m1, m2 = arch_abs_pair(z, precision)
    total = DyadicInterval.exact(a, precision).log() + m1.max_with(one).log() + m2.max_with(one).log()
    return total * Fraction(1, 2)
