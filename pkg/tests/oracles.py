"""Independent reference computations used by the tests.

Nothing here calls into critheight's valuation or height code.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import sympy
from sympy.ntheory import sqrt_mod

HENSEL_DIGITS = 60


def vp_int(n: int, p: int) -> int:
    return sympy.multiplicity(p, n) if n else HENSEL_DIGITS * 10


def vp(q: Fraction, p: int) -> int:
    return sympy.multiplicity(p, q.numerator) - sympy.multiplicity(p, q.denominator)


def splits(D: int, p: int) -> bool:
    """D a nonzero square unit in Z_p (so p splits in Q(sqrt(D)))."""
    if D % p == 0:
        return False
    if p == 2:
        return D % 8 == 1
    return sympy.legendre_symbol(D % p, p) == 1


def hensel_valuations(x: Fraction, y: Fraction, D: int, p: int, digits: int = HENSEL_DIGITS):
    """Valuations of x + y r and x - y r with r a p-adic square root of D.

    r is lifted to p**digits; the result is exact as long as both values stay
    below ``digits``.
    """
    mod = p**digits
    r = sqrt_mod(D, mod)
    if r is None or (r * r - D) % mod:
        raise ValueError("D has no square root in Z_p")
    L = lcm(x.denominator, y.denominator)
    X, Y = int(x * L), int(y * L)
    shift = vp_int(L, p)
    out = []
    for u in ((X + Y * r) % mod, (X - Y * r) % mod):
        if u == 0:
            raise ValueError("Hensel precision exhausted")
        v = vp_int(u, p)
        if v >= digits:
            raise ValueError("Hensel precision exhausted")
        out.append(Fraction(v - shift))
    return tuple(sorted(out))


def sym(q: Fraction):
    return sympy.Rational(q.numerator, q.denominator)


def log_height_integer(qs) -> int:
    """max(L, |L q_i|) with L the lcm of denominators."""
    L = 1
    for q in qs:
        L = lcm(L, Fraction(q).denominator)
    return max([L] + [abs(Fraction(q) * L).numerator for q in qs])
