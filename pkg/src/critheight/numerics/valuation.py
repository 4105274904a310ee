"""p-adic valuations of rationals."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

from sympy import factorint, isprime

INF = math.inf

Rational = Fraction
ValOrInf = Union[Fraction, float]


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@lru_cache(maxsize=4096)
def _check_prime(p: int) -> None:
    if isinstance(p, bool) or not isinstance(p, int) or p < 2 or not isprime(p):
        raise ValueError(f"{p!r} is not a prime")


def _int_valuation(n: int, p: int) -> int:
    n = abs(n)
    e = 0
    # strip large powers first so huge numerators stay cheap
    power, step = p, 1
    while n % power == 0:
        n //= power
        e += step
        power *= power
        step *= 2
    while n % p == 0:
        n //= p
        e += 1
    return e


def padic_valuation(q, p: int) -> ValOrInf:
    """Return v_p(q) as a Fraction (integral valued), or ``INF`` for zero."""
    _check_prime(p)
    q = as_rational(q)
    if q == 0:
        return INF
    return Fraction(_int_valuation(q.numerator, p) - _int_valuation(q.denominator, p))


def prime_divisors(n: int) -> list[int]:
    """Sorted prime divisors of a nonzero integer."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("zero has no finite prime support")
    return sorted(int(p) for p in factorint(n))
