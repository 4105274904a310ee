"""Outward-rounded intervals with dyadic endpoints.

Endpoints are raw mpmath ``mpf`` tuples (sign, mantissa, exponent, bitcount),
so every endpoint is exactly ``m * 2**e`` and exponents are unbounded Python
ints. Each operation rounds its lower endpoint toward -inf and its upper
endpoint toward +inf at the working precision of the result.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from mpmath import mp, mpf
from mpmath.libmp import (
    fone,
    from_int,
    from_rational,
    fzero,
    mpf_add,
    mpf_cmp,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_sqrt,
    mpf_sub,
    mpf_div,
    round_ceiling,
    round_floor,
    to_str,
)

DEFAULT_PRECISION = 128
DEFAULT_REFINEMENTS = 4

_FLOOR = round_floor
_CEIL = round_ceiling


def _cmp_mpf_fraction(x, q: Fraction) -> int:
    """Exact three-way comparison of an mpf tuple with a rational."""
    sign, man, exp, bc = x
    if not man:
        # mpf zero has man == 0; infinities are never produced here
        return (0 > q) - (0 < q)
    value_sign = -1 if sign else 1
    q_sign = (q > 0) - (q < 0)
    if value_sign != q_sign:
        return 1 if value_sign > q_sign else -1
    # same sign: compare magnitudes |x| vs |q|
    a, b = abs(q.numerator), q.denominator
    # |x| lies in [2**(exp+bc-1), 2**(exp+bc)); |q| in [2**(la-lb-1), 2**(la-lb+1))
    top = exp + bc
    est = a.bit_length() - b.bit_length()
    if top > est + 2:
        mag = 1
    elif top < est - 2:
        mag = -1
    else:
        if exp >= 0:
            lhs, rhs = (man << exp) * b, a
        else:
            lhs, rhs = man * b, a << (-exp)
        mag = (lhs > rhs) - (lhs < rhs)
    return mag * value_sign


def _min(*xs):
    best = xs[0]
    for x in xs[1:]:
        if mpf_cmp(x, best) < 0:
            best = x
    return best


def _max(*xs):
    best = xs[0]
    for x in xs[1:]:
        if mpf_cmp(x, best) > 0:
            best = x
    return best


class DyadicInterval:
    """Closed interval [lo, hi] with dyadic endpoints."""

    __slots__ = ("_lo", "_hi", "prec")

    def __init__(self, lo, hi, prec: int = DEFAULT_PRECISION):
        if mpf_cmp(lo, hi) > 0:
            raise ValueError("interval endpoints out of order")
        self._lo = lo
        self._hi = hi
        self.prec = prec

    # -- construction -------------------------------------------------
    @classmethod
    def exact(cls, q, prec: int = DEFAULT_PRECISION) -> "DyadicInterval":
        """Tightest enclosure of a rational (or int) at ``prec`` bits."""
        if isinstance(q, int):
            q = Fraction(q)
        p, d = q.numerator, q.denominator
        return cls(from_rational(p, d, prec, _FLOOR), from_rational(p, d, prec, _CEIL), prec)

    @classmethod
    def from_bounds(cls, lo, hi, prec: int = DEFAULT_PRECISION) -> "DyadicInterval":
        lo = Fraction(lo)
        hi = Fraction(hi)
        return cls(
            from_rational(lo.numerator, lo.denominator, prec, _FLOOR),
            from_rational(hi.numerator, hi.denominator, prec, _CEIL),
            prec,
        )

    @classmethod
    def zero(cls, prec: int = DEFAULT_PRECISION) -> "DyadicInterval":
        return cls(fzero, fzero, prec)

    @classmethod
    def hull(cls, *items: "DyadicInterval") -> "DyadicInterval":
        return cls(
            _min(*(i._lo for i in items)),
            _max(*(i._hi for i in items)),
            max(i.prec for i in items),
        )

    # -- accessors -----------------------------------------------------
    @property
    def lo(self) -> mpf:
        # make_mpf keeps the endpoint exact; mpf() would round to the ambient precision
        return mp.make_mpf(self._lo)

    @property
    def hi(self) -> mpf:
        return mp.make_mpf(self._hi)

    @property
    def lo_raw(self):
        return self._lo

    @property
    def hi_raw(self):
        return self._hi

    def width(self) -> mpf:
        return mp.make_mpf(mpf_sub(self._hi, self._lo, self.prec, _CEIL))

    def midpoint(self) -> mpf:
        return mp.make_mpf(mpf_mul(mpf_add(self._lo, self._hi, self.prec + 2), (0, 1, -1, 1), self.prec + 2))

    def is_exact(self) -> bool:
        return self._lo == self._hi

    def is_zero(self) -> bool:
        return self._lo == fzero and self._hi == fzero

    def contains(self, value) -> bool:
        """Membership test for a Fraction, int, float or mpf."""
        if isinstance(value, (int, Fraction)):
            q = Fraction(value)
            return _cmp_mpf_fraction(self._lo, q) <= 0 and _cmp_mpf_fraction(self._hi, q) >= 0
        x = mpf(value)._mpf_
        return mpf_cmp(self._lo, x) <= 0 and mpf_cmp(x, self._hi) <= 0

    def contains_interval(self, other: "DyadicInterval") -> bool:
        return mpf_cmp(self._lo, other._lo) <= 0 and mpf_cmp(other._hi, self._hi) <= 0

    def intersects(self, other: "DyadicInterval") -> bool:
        return mpf_cmp(self._lo, other._hi) <= 0 and mpf_cmp(other._lo, self._hi) <= 0

    def exact_bounds(self) -> tuple[Fraction, Fraction]:
        """Endpoints as Fractions; only sensible for modest exponents."""
        return _to_fraction(self._lo), _to_fraction(self._hi)

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "DyadicInterval":
        if isinstance(other, DyadicInterval):
            return other
        if isinstance(other, (int, Fraction)):
            return DyadicInterval.exact(Fraction(other), self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        return DyadicInterval(
            mpf_add(self._lo, other._lo, prec, _FLOOR),
            mpf_add(self._hi, other._hi, prec, _CEIL),
            prec,
        )

    __radd__ = __add__

    def __neg__(self):
        return DyadicInterval(mpf_neg(self._hi), mpf_neg(self._lo), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        return DyadicInterval(
            mpf_sub(self._lo, other._hi, prec, _FLOOR),
            mpf_sub(self._hi, other._lo, prec, _CEIL),
            prec,
        )

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        a, b, c, d = self._lo, self._hi, other._lo, other._hi
        lows = [mpf_mul(x, y, prec, _FLOOR) for x in (a, b) for y in (c, d)]
        highs = [mpf_mul(x, y, prec, _CEIL) for x in (a, b) for y in (c, d)]
        return DyadicInterval(_min(*lows), _max(*highs), prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if mpf_cmp(other._lo, fzero) <= 0 <= mpf_cmp(other._hi, fzero):
            raise ZeroDivisionError("divisor interval contains zero")
        prec = max(self.prec, other.prec)
        a, b, c, d = self._lo, self._hi, other._lo, other._hi
        lows = [mpf_div(x, y, prec, _FLOOR) for x in (a, b) for y in (c, d)]
        highs = [mpf_div(x, y, prec, _CEIL) for x in (a, b) for y in (c, d)]
        return DyadicInterval(_min(*lows), _max(*highs), prec)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def square(self) -> "DyadicInterval":
        a = self.abs()
        return DyadicInterval(
            mpf_mul(a._lo, a._lo, self.prec, _FLOOR),
            mpf_mul(a._hi, a._hi, self.prec, _CEIL),
            self.prec,
        )

    def __pow__(self, n: int) -> "DyadicInterval":
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = DyadicInterval(fone, fone, self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.square()
        return result

    def abs(self) -> "DyadicInterval":
        if mpf_cmp(self._lo, fzero) >= 0:
            return self
        if mpf_cmp(self._hi, fzero) <= 0:
            return -self
        return DyadicInterval(fzero, _max(mpf_neg(self._lo), self._hi), self.prec)

    def sqrt(self) -> "DyadicInterval":
        lo = self._lo if mpf_cmp(self._lo, fzero) > 0 else fzero
        if mpf_cmp(self._hi, fzero) < 0:
            raise ValueError("square root of a negative interval")
        return DyadicInterval(
            mpf_sqrt(lo, self.prec, _FLOOR), mpf_sqrt(self._hi, self.prec, _CEIL), self.prec
        )

    def log(self) -> "DyadicInterval":
        """Natural logarithm; the interval must be strictly positive."""
        if mpf_cmp(self._lo, fzero) <= 0:
            raise ValueError("logarithm of a non-positive interval")
        if self._lo == fone and self._hi == fone:
            return DyadicInterval.zero(self.prec)
        # one extra ulp of slack on each side guards against library rounding slips
        lo = mpf_log(self._lo, self.prec, _FLOOR)
        hi = mpf_log(self._hi, self.prec, _CEIL)
        return DyadicInterval(_nudge(lo, self.prec, -1), _nudge(hi, self.prec, +1), self.prec)

    def max0(self) -> "DyadicInterval":
        """Pointwise max(0, x)."""
        return DyadicInterval(_max(self._lo, fzero), _max(self._hi, fzero), self.prec)

    def max_with(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(
            _max(self._lo, other._lo), _max(self._hi, other._hi), max(self.prec, other.prec)
        )

    def intersect(self, other: "DyadicInterval") -> "DyadicInterval":
        """Intersection of two enclosures of the same quantity."""
        return DyadicInterval(
            _max(self._lo, other._lo), _min(self._hi, other._hi), max(self.prec, other.prec)
        )

    def with_prec(self, prec: int) -> "DyadicInterval":
        return DyadicInterval(self._lo, self._hi, prec)

    # -- three-valued comparisons -------------------------------------
    def gt(self, other) -> Optional[bool]:
        """True if every point exceeds ``other``, False if none does, else None."""
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if _cmp_mpf_fraction(self._lo, q) > 0:
                return True
            if _cmp_mpf_fraction(self._hi, q) <= 0:
                return False
            return None
        if mpf_cmp(self._lo, other._hi) > 0:
            return True
        if mpf_cmp(self._hi, other._lo) <= 0:
            return False
        return None

    def le(self, other) -> Optional[bool]:
        r = self.gt(other)
        return None if r is None else not r

    def __repr__(self) -> str:
        return f"DyadicInterval({self.format()})"

    def format(self, digits: int = 12) -> str:
        """Decimal midpoint with an explicit radius, ``mid ± rad``."""
        if self.is_exact():
            return to_str(self._lo, max(digits, 20))
        mid = mpf_mul(mpf_add(self._lo, self._hi, self.prec + 2), (0, 1, -1, 1), self.prec + 2)
        rad = mpf_sub(self._hi, mid, 30, _CEIL)
        return f"{to_str(mid, digits)} ± {to_str(rad, 3)}"

    def dyadic_endpoints(self) -> tuple[str, str]:
        return _dyadic_str(self._lo), _dyadic_str(self._hi)

    def to_json(self) -> dict:
        lo, hi = self.dyadic_endpoints()
        return {"lo": lo, "hi": hi, "lo_dec": to_str(self._lo, 20), "hi_dec": to_str(self._hi, 20)}


def _nudge(x, prec: int, direction: int):
    sign, man, exp, bc = x
    if not man:
        ulp = (0, 1, -prec - 64, 1)
    else:
        ulp = (0, 1, exp + bc - prec, 1)
    if direction < 0:
        return mpf_sub(x, ulp, prec, _FLOOR)
    return mpf_add(x, ulp, prec, _CEIL)


def _dyadic_str(x) -> str:
    sign, man, exp, bc = x
    if not man:
        return "0"
    return f"{'-' if sign else ''}{int(man)}*2^{exp}"


def _to_fraction(x) -> Fraction:
    sign, man, exp, bc = x
    value = Fraction(int(man)) * (Fraction(2) ** exp)
    return -value if sign else value


def decide(
    test: Callable[[int], Optional[bool]],
    precision: int = DEFAULT_PRECISION,
    max_refinements: int = DEFAULT_REFINEMENTS,
) -> tuple[Optional[bool], int]:
    """Evaluate a three-valued test, doubling precision while it is inconclusive.

    Returns the verdict (None if still inconclusive after ``max_refinements``
    doublings) together with the precision that produced it.
    """
    prec = precision
    for _ in range(max_refinements + 1):
        verdict = test(prec)
        if verdict is not None:
            return verdict, prec
        prec *= 2
    return None, prec // 2


def log_rational(q, prec: int = DEFAULT_PRECISION) -> DyadicInterval:
    """Enclosure of log(q) for a positive rational q."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("logarithm of a non-positive rational")
    if q.denominator == 1:
        return DyadicInterval.exact(q.numerator, prec).log()
    return DyadicInterval.exact(q.numerator, prec).log() - DyadicInterval.exact(q.denominator, prec).log()

