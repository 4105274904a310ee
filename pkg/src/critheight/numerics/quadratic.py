"""Elements of Q(sqrt(D)) and their absolute values at every place."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Union

from .interval import DEFAULT_PRECISION, DyadicInterval
from .valuation import INF, as_rational, padic_valuation


def rational_sqrt(q: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True, eq=False)
class QuadExt:
    """x + y*sqrt(D) with rational x, y, D.

    D is stored as given (no squarefree reduction). Elements with different D
    never mix in arithmetic; with ``y == 0`` the element is rational and D only
    records which field it was produced in, and the element compares (and
    hashes) equal to the rational x.
    """

    x: Fraction
    y: Fraction
    D: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", as_rational(self.x))
        object.__setattr__(self, "y", as_rational(self.y))
        object.__setattr__(self, "D", as_rational(self.D))
        if self.y != 0 and (self.D == 0 or rational_sqrt(self.D) is not None):
            raise ValueError(f"D = {self.D} is a rational square; use a rational element")

    @classmethod
    def rational(cls, q, D) -> "QuadExt":
        return cls(as_rational(q), Fraction(0), D)

    @classmethod
    def sqrt_of(cls, q, scale=1) -> "QuadExt":
        """scale * sqrt(q), collapsing to a rational element when q is a square."""
        q = as_rational(q)
        scale = as_rational(scale)
        root = rational_sqrt(q)
        if root is not None:
            return cls(scale * root, Fraction(0), q)
        return cls(Fraction(0), scale, q)

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            if self.y == 0 and other.y == 0:
                return self.x == other.x
            return (self.x, self.y, self.D) == (other.x, other.y, other.D)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.y == 0 and self.x == other
        return NotImplemented

    def __hash__(self):
        if self.y == 0:
            return hash(self.x)
        return hash((self.x, self.y, self.D))

    # -- structure -----------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.y == 0

    @property
    def is_pure(self) -> bool:
        """True for rational elements and rational multiples of sqrt(D)."""
        return self.x == 0 or self.y == 0

    def conj(self) -> "QuadExt":
        return QuadExt(self.x, -self.y, self.D)

    def norm(self) -> Fraction:
        return self.x * self.x - self.D * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def __bool__(self) -> bool:
        return self.x != 0 or self.y != 0

    # -- arithmetic ----------------------------------------------------
    def _lift(self, other) -> "QuadExt":
        if isinstance(other, QuadExt):
            if other.D != self.D:
                raise ValueError(f"cannot mix Q(sqrt({self.D})) with Q(sqrt({other.D}))")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadExt(Fraction(other), Fraction(0), self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.x + o.x, self.y + o.y, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.x, -self.y, self.D)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.x - o.x, self.y - o.y, self.D)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadExt(self.x * other, self.y * other, self.D)
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QuadExt(
            self.x * o.x + self.D * self.y * o.y,
            self.x * o.y + self.y * o.x,
            self.D,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt(D))")
        return QuadExt(self.x / n, -self.y / n, self.D)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadExt(self.x / other, self.y / other, self.D)
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExt(Fraction(1), Fraction(0), self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def bit_size(self) -> int:
        return sum(
            abs(q.numerator).bit_length() + q.denominator.bit_length() for q in (self.x, self.y)
        )

    def __str__(self) -> str:
        if self.y == 0:
            return str(self.x)
        mag = abs(self.y)
        rad = f"sqrt({self.D})" if mag == 1 else f"{mag}*sqrt({self.D})"
        sign = "-" if self.y < 0 else "+"
        if self.x == 0:
            return rad if sign == "+" else "-" + rad
        return f"{self.x}{sign}{rad}"


Scalar = Union[Fraction, QuadExt]


def as_quad(z, D=None) -> QuadExt:
    if isinstance(z, QuadExt):
        return z
    return QuadExt.rational(as_rational(z), D if D is not None else Fraction(0))


def quad_minimal_polynomial(z) -> tuple[Fraction, Fraction]:
    """(t, n) with z a root of T^2 - t*T + n."""
    if isinstance(z, QuadExt):
        return z.trace(), z.norm()
    q = as_rational(z)
    return 2 * q, q * q


def quad_valuations(z, p: int) -> tuple[Fraction, Fraction]:
    """Valuations of z and its conjugate at the places above p, smaller first.

    Read off the lower Newton polygon of T^2 - t*T + n through the points
    (0, v(n)), (1, v(t)), (2, 0).
    """
    t, n = quad_minimal_polynomial(z)
    if n == 0:
        # only z = 0 has zero norm (D is never a square when y != 0)
        raise ValueError("valuations of zero are infinite")
    vn = padic_valuation(n, p)
    vt = padic_valuation(t, p)
    if vt != INF and 2 * vt <= vn:
        return vt, vn - vt
    half = vn / 2
    return half, half


# -- archimedean embeddings ----------------------------------------------


@dataclass(frozen=True)
class ComplexInterval:
    """Rectangular enclosure re + i*im; ``im is None`` means a real interval."""

    re: DyadicInterval
    im: Optional[DyadicInterval] = None

    def __add__(self, other: "ComplexInterval") -> "ComplexInterval":
        if self.im is None and other.im is None:
            return ComplexInterval(self.re + other.re)
        return ComplexInterval(self.re + other.re, _im(self) + _im(other))

    def __sub__(self, other: "ComplexInterval") -> "ComplexInterval":
        if self.im is None and other.im is None:
            return ComplexInterval(self.re - other.re)
        return ComplexInterval(self.re - other.re, _im(self) - _im(other))

    def __mul__(self, other: "ComplexInterval") -> "ComplexInterval":
        if self.im is None and other.im is None:
            return ComplexInterval(self.re * other.re)
        if other.im is None:
            return ComplexInterval(self.re * other.re, self.im * other.re)
        if self.im is None:
            return ComplexInterval(self.re * other.re, self.re * other.im)
        return ComplexInterval(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def scale(self, q) -> "ComplexInterval":
        if isinstance(q, DyadicInterval):
            s = q
        else:
            s = DyadicInterval.exact(as_rational(q), self.re.prec)
        if self.im is None:
            return ComplexInterval(self.re * s)
        return ComplexInterval(self.re * s, self.im * s)

    def shift(self, q) -> "ComplexInterval":
        return ComplexInterval(self.re + DyadicInterval.exact(as_rational(q), self.re.prec), self.im)

    def abs_squared(self) -> DyadicInterval:
        if self.im is None:
            return self.re.square()
        return self.re.square() + self.im.square()

    def abs(self) -> DyadicInterval:
        if self.im is None:
            return self.re.abs()
        return self.abs_squared().sqrt()


def _im(z: ComplexInterval) -> DyadicInterval:
    return z.im if z.im is not None else DyadicInterval.zero(z.re.prec)


def embed(z, prec: int = DEFAULT_PRECISION) -> tuple[ComplexInterval, ComplexInterval]:
    """Enclosures of z under the two embeddings of Q(sqrt(D)) into C.

    For D > 0 these are x + y*sqrt(D) and x - y*sqrt(D); for D < 0 the second
    is the complex conjugate of the first.
    """
    if not isinstance(z, QuadExt) or z.y == 0:
        q = z.x if isinstance(z, QuadExt) else as_rational(z)
        r = ComplexInterval(DyadicInterval.exact(q, prec))
        return r, r
    x = DyadicInterval.exact(z.x, prec)
    if z.D > 0:
        s = DyadicInterval.exact(z.D, prec).sqrt() * DyadicInterval.exact(z.y, prec)
        return ComplexInterval(x + s), ComplexInterval(x - s)
    s = DyadicInterval.exact(-z.D, prec).sqrt() * DyadicInterval.exact(z.y, prec)
    return ComplexInterval(x, s), ComplexInterval(x, -s)


def arch_abs_pair(z, precision: int = DEFAULT_PRECISION) -> tuple[DyadicInterval, DyadicInterval]:
    """Rigorous enclosures of the absolute values of z under both embeddings."""
    if isinstance(z, QuadExt) and z.y != 0 and z.D < 0:
        m = DyadicInterval.exact(z.norm(), precision).sqrt()
        return m, m
    a, b = embed(z, precision)
    if a is b:
        m = a.abs()
        return m, m
    return a.abs(), b.abs()
