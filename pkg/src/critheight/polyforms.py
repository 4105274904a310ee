"""Polynomials over Q, their normal forms, affine conjugation and coefficient heights."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from sympy import integer_nthroot

from .numerics import (
    DEFAULT_PRECISION,
    DEFAULT_REFINEMENTS,
    DyadicInterval,
    QuadExt,
    Scalar,
    as_rational,
    decide,
    height,
    height_integer,
    rational_sqrt,
    tuple_height,
)


class UnsupportedField(ValueError):
    """The requested object needs scalars outside Q and Q(sqrt(D))."""


class Form(enum.Enum):
    RAW = "raw"
    MONIC_CENTRED = "monic-centred"
    CRITICAL_PARAM = "critical-param"


def _normalize(s) -> Scalar:
    if isinstance(s, QuadExt):
        return s.x if s.y == 0 else s
    return as_rational(s)


@dataclass(frozen=True)
class PolySpec:
    """a_d z^d + ... + a_0, coefficients listed from the leading one down.

    Coefficients are rationals, except that monic-centred conjugates of
    non-monic polynomials may carry elements of one field Q(sqrt(D)).
    The form tag and critical vector are metadata and ignored by ``==``.
    """

    coeffs: tuple
    form: Form = field(default=Form.RAW, compare=False)
    critical: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        coeffs = tuple(_normalize(c) for c in self.coeffs)
        if not coeffs or coeffs[0] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", coeffs)
        if self.form is Form.MONIC_CENTRED:
            if coeffs[0] != 1 or (len(coeffs) > 1 and coeffs[1] != 0):
                raise ValueError("monic-centred form needs a_d = 1 and a_{d-1} = 0")
        elif self.form is Form.CRITICAL_PARAM:
            d = self.degree
            if coeffs[0] != Fraction(1, d) or coeffs[-1] != 0:
                raise ValueError("critical-parameter form needs a_d = 1/d and a_0 = 0")
            if self.critical is None or len(self.critical) != d - 1:
                raise ValueError("critical-parameter form needs d - 1 critical points")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, i: int) -> Scalar:
        """a_i, the coefficient of z**i."""
        return self.coeffs[self.degree - i]

    @property
    def leading(self) -> Scalar:
        return self.coeffs[0]

    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def __call__(self, z):
        acc = self.coeffs[0]
        for c in self.coeffs[1:]:
            acc = acc * z + c
        return acc

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def to_text(self) -> str:
        """Canonical serialization ``d; a_d, ..., a_0`` with rationals as num/den."""
        if not self.is_rational():
            raise ValueError("only rational polynomials have a text form")
        body = ", ".join(f"{c.numerator}/{c.denominator}" for c in self.coeffs)
        return f"{self.degree}; {body}"

    @classmethod
    def from_text(cls, text: str) -> "PolySpec":
        try:
            head, body = text.split(";", 1)
            d = int(head)
            coeffs = [Fraction(part.strip()) for part in body.split(",")]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed polynomial text {text!r}") from exc
        if len(coeffs) != d + 1:
            raise ValueError(f"degree {d} needs {d + 1} coefficients, got {len(coeffs)}")
        return cls(tuple(coeffs))

    def __str__(self) -> str:
        terms = []
        d = self.degree
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            power = d - i
            mono = "" if power == 0 else ("z" if power == 1 else f"z^{power}")
            if mono and c == 1:
                terms.append(mono)
            elif mono:
                terms.append(f"({c})*{mono}")
            else:
                terms.append(f"({c})")
        return " + ".join(terms) if terms else "0"


def monic_centred(*lower) -> PolySpec:
    """z^d + a_{d-2} z^{d-2} + ... + a_0 from (a_{d-2}, ..., a_0)."""
    return PolySpec((Fraction(1), Fraction(0)) + tuple(as_rational(a) for a in lower), Form.MONIC_CENTRED)


def cubic(A, B) -> PolySpec:
    """z^3 + A z + B."""
    return monic_centred(A, B)


def quadratic(c) -> PolySpec:
    """z^2 + c."""
    return monic_centred(c)


# -- coefficient-list polynomial arithmetic -------------------------------
# lists are ordered constant term first


def _padd(p: list, q: list) -> list:
    out = [Fraction(0)] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] = out[i] + c
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return out


def _pmul(p: list, q: list) -> list:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def _ascending(F: PolySpec) -> list:
    return list(reversed(F.coeffs))


def _from_ascending(coeffs: list, **kw) -> PolySpec:
    coeffs = [_normalize(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return PolySpec(tuple(reversed(coeffs)), **kw)


def compose(F: PolySpec, G: PolySpec) -> PolySpec:
    """F(G(z))."""
    g = _ascending(G)
    acc = [F.coeffs[0]]
    for c in F.coeffs[1:]:
        acc = _padd(_pmul(acc, g), [c])
    return _from_ascending(acc)


def poly_from_roots(roots: Sequence) -> PolySpec:
    """Monic (z - r_1)...(z - r_k)."""
    acc = [Fraction(1)]
    for r in roots:
        acc = _pmul(acc, [-r, Fraction(1)])
    return _from_ascending(acc)


def derivative(F: PolySpec) -> PolySpec:
    d = F.degree
    if d == 0:
        raise ValueError("derivative of a constant")
    return PolySpec(tuple(c * (d - i) for i, c in enumerate(F.coeffs[:-1])))


# -- critical normal form -------------------------------------------------


def from_critical_points(c: Sequence) -> PolySpec:
    """f_c: leading coefficient 1/d, f_c(0) = 0 and f_c'(z) = prod (z - c_i)."""
    c = tuple(_normalize(ci) for ci in c)
    if not c:
        raise ValueError("need at least one critical point")
    dprime = _ascending(poly_from_roots(c))
    integral = [Fraction(0)] + [coef / (k + 1) for k, coef in enumerate(dprime)]
    return _from_ascending(integral, form=Form.CRITICAL_PARAM, critical=c)


def g_forms(c: Sequence) -> list:
    """(f_c(c_1), ..., f_c(c_{d-1})); each is a degree-d form in c."""
    f = from_critical_points(c)
    return [f(ci) for ci in f.critical]


# -- affine conjugation ---------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """psi(z) = alpha*z + gamma with alpha != 0."""

    alpha: Scalar
    gamma: Scalar = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _normalize(self.alpha))
        object.__setattr__(self, "gamma", _normalize(self.gamma))
        if self.alpha == 0:
            raise ValueError("affine map is not invertible")

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(Fraction(1), Fraction(0))

    def __call__(self, z):
        return self.alpha * z + self.gamma

    def inverse(self) -> "AffineMap":
        inv = 1 / self.alpha
        return AffineMap(inv, -self.gamma * inv)

    def then(self, other: "AffineMap") -> "AffineMap":
        """self o other, i.e. z -> self(other(z))."""
        return AffineMap(self.alpha * other.alpha, self.alpha * other.gamma + self.gamma)

    def as_poly(self) -> PolySpec:
        return _from_ascending([self.gamma, self.alpha])


def affine_conjugate(F: PolySpec, psi: AffineMap) -> PolySpec:
    """psi^{-1} o F o psi."""
    inner = compose(F, psi.as_poly())
    asc = _ascending(inner)
    inv = 1 / psi.alpha
    asc[0] = asc[0] - psi.gamma
    return _from_ascending([c * inv for c in asc])


def _rational_root(q: Fraction, k: int) -> Optional[Fraction]:
    """Rational k-th root of q if one exists (real root for odd k)."""
    if q < 0:
        if k % 2 == 0:
            return None
        r = _rational_root(-q, k)
        return None if r is None else -r
    rn, exact_n = integer_nthroot(q.numerator, k)
    rd, exact_d = integer_nthroot(q.denominator, k)
    if exact_n and exact_d:
        return Fraction(int(rn), int(rd))
    return None


def _scaling_root(a_d: Fraction, d: int) -> Scalar:
    """alpha with alpha^(d-1) = 1/a_d, in Q or as sqrt of a rational."""
    target = 1 / a_d
    k = d - 1
    r = _rational_root(target, k)
    if r is not None:
        return r
    if k % 2 == 0:
        s = _rational_root(target, k // 2)
        if s is not None and rational_sqrt(s) is None:
            return QuadExt(Fraction(0), Fraction(1), s)
    raise UnsupportedField(f"no root of alpha^{k} = {target} in Q or Q(sqrt(D))")


def to_monic_centred(F: PolySpec) -> tuple[PolySpec, AffineMap]:
    """A monic centred conjugate G = F^psi and the psi used."""
    if F.form is Form.MONIC_CENTRED:
        return F, AffineMap.identity()
    if not F.is_rational():
        raise UnsupportedField("normal forms are computed for rational polynomials only")
    d = F.degree
    if d < 2:
        raise ValueError("degree must be at least 2")
    a_d = F.coefficient(d)
    gamma = -F.coefficient(d - 1) / (d * a_d)
    psi = AffineMap(_scaling_root(a_d, d), gamma)
    G = affine_conjugate(F, psi)
    G = PolySpec(G.coeffs, Form.MONIC_CENTRED)
    return G, psi


# -- critical points ------------------------------------------------------


@dataclass(frozen=True)
class CriticalPoint:
    """A zero of F' of the given multiplicity (so e_P(F) = multiplicity + 1)."""

    location: Scalar
    multiplicity: int = 1


def critical_points_cubic(A, B) -> list[CriticalPoint]:
    """Critical points +-alpha of z^3 + A z + B, alpha^2 = -A/3."""
    A = as_rational(A)
    if A == 0:
        return [CriticalPoint(Fraction(0), 2)]
    alpha = QuadExt.sqrt_of(-A / 3)
    if alpha.y == 0:
        return [CriticalPoint(alpha.x), CriticalPoint(-alpha.x)]
    return [CriticalPoint(alpha), CriticalPoint(-alpha)]


def critical_points(F: PolySpec) -> list[CriticalPoint]:
    """Critical points of F with multiplicity.

    Degrees 2 and 3 are handled in closed form (Q or Q(sqrt(D))); higher
    degrees need a stored critical vector or rational roots of F'.
    """
    d = F.degree
    if F.critical is not None:
        counts: dict = {}
        for c in F.critical:
            counts[c] = counts.get(c, 0) + 1
        return [CriticalPoint(c, m) for c, m in counts.items()]
    if not F.is_rational():
        raise UnsupportedField("critical points need rational coefficients")
    if d == 2:
        return [CriticalPoint(-F.coefficient(1) / (2 * F.coefficient(2)))]
    if d == 3:
        a3, a2, a1 = F.coefficient(3), F.coefficient(2), F.coefficient(1)
        centre = -a2 / (3 * a3)
        disc = (a2 * a2 - 3 * a3 * a1) / (9 * a3 * a3)
        if disc == 0:
            return [CriticalPoint(centre, 2)]
        root = QuadExt.sqrt_of(disc)
        if root.y == 0:
            return [CriticalPoint(centre + root.x), CriticalPoint(centre - root.x)]
        return [CriticalPoint(centre + root), CriticalPoint(centre - root)]
    return _rational_critical_points(F)


def _rational_critical_points(F: PolySpec) -> list[CriticalPoint]:
    from sympy import Poly, QQ, Rational as SymRational, symbols

    z = symbols("z")
    dF = derivative(F)
    poly = Poly([SymRational(c.numerator, c.denominator) for c in dF.coeffs], z, domain=QQ)
    found = poly.ground_roots()
    if sum(found.values()) != F.degree - 1:
        raise UnsupportedField("critical points of degree >= 4 must all be rational")
    return [
        CriticalPoint(Fraction(int(r.p), int(r.q)), int(m))
        for r, m in sorted(found.items(), key=lambda kv: kv[0])
    ]


# -- heights of coefficients ------------------------------------------------


def coefficient_height(F: PolySpec, precision: int = DEFAULT_PRECISION) -> DyadicInterval:
    """h(a_d, ..., a_0)."""
    return tuple_height(F.coeffs, precision)


def monic_centred_height(F: PolySpec, precision: int = DEFAULT_PRECISION) -> DyadicInterval:
    """h(a_{d-2}, ..., a_0) of a monic centred conjugate of F."""
    G, _ = to_monic_centred(F)
    return tuple_height(G.coeffs[2:], precision)


# -- height inequalities ----------------------------------------------------


@dataclass
class InequalityCheck:
    name: str
    lhs: DyadicInterval
    rhs: DyadicInterval
    holds: Optional[bool]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs.format(),
            "rhs": self.rhs.format(),
            "holds": self.holds,
        }


def _check(name, sides, precision, max_refinements, exact=None) -> InequalityCheck:
    """Decide lhs <= rhs.

    ``exact`` settles the comparison in integers when both sides are logs of
    rationals (ties are common there); otherwise precision is refined.
    """
    last = {}

    def test(prec):
        lhs, rhs = sides(prec)
        last["sides"] = (lhs, rhs)
        diff = rhs - lhs
        if diff.lo >= 0:
            return True
        if diff.hi < 0:
            return False
        return None

    if exact is not None:
        lhs, rhs = sides(precision)
        return InequalityCheck(name, lhs, rhs, bool(exact()))
    verdict, _ = decide(test, precision, max_refinements)
    lhs, rhs = last["sides"]
    return InequalityCheck(name, lhs, rhs, verdict)


def _log_int(n: int, prec: int) -> DyadicInterval:
    return DyadicInterval.exact(n, prec).log()


def _all_rational(values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def check_affine_height_bound(
    F: PolySpec, psi: AffineMap, precision: int = DEFAULT_PRECISION,
    max_refinements: int = DEFAULT_REFINEMENTS,
) -> InequalityCheck:
    """h(F^psi) <= h(F) + d(h(alpha) + h(gamma)) + d log 2 + log d."""
    d = F.degree
    G = affine_conjugate(F, psi)

    def sides(prec):
        lhs = coefficient_height(G, prec)
        rhs = (
            coefficient_height(F, prec)
            + (height(psi.alpha, prec) + height(psi.gamma, prec)) * d
            + _log_int(2, prec) * d
            + _log_int(d, prec)
        )
        return lhs, rhs

    exact = None
    if _all_rational(F.coeffs + (psi.alpha, psi.gamma)):
        def exact():
            scale = (height_integer([psi.alpha]) * height_integer([psi.gamma])) ** d
            return height_integer(G.coeffs) <= height_integer(F.coeffs) * scale * 2**d * d

    return _check("affine-conjugation", sides, precision, max_refinements, exact)


def check_roots_height_bounds(
    roots: Sequence, precision: int = DEFAULT_PRECISION,
    max_refinements: int = DEFAULT_REFINEMENTS,
) -> list[InequalityCheck]:
    """sum h(beta_i) - d log 2 <= h(b_{d-1}, ..., b_0) <= sum h(beta_i) + d log 2."""
    roots = [_normalize(r) for r in roots]
    F = poly_from_roots(roots)
    d = F.degree

    def root_sum(prec):
        s = DyadicInterval.zero(prec)
        for r in roots:
            s = s + height(r, prec)
        return s

    def lower(prec):
        return root_sum(prec) - _log_int(2, prec) * d, tuple_height(F.coeffs[1:], prec)

    def upper(prec):
        return tuple_height(F.coeffs[1:], prec), root_sum(prec) + _log_int(2, prec) * d

    exact_lower = exact_upper = None
    if _all_rational(roots):
        prod = 1
        for r in roots:
            prod *= height_integer([r])
        coeff_h = height_integer(F.coeffs[1:])

        def exact_lower():
            return prod <= coeff_h * 2**d

        def exact_upper():
            return coeff_h <= prod * 2**d

    return [
        _check("roots-lower", lower, precision, max_refinements, exact_lower),
        _check("roots-upper", upper, precision, max_refinements, exact_upper),
    ]


ROSSER_SCHOENFELD = Fraction(126, 100)


def check_derivative_height_bounds(
    F: PolySpec, precision: int = DEFAULT_PRECISION,
    max_refinements: int = DEFAULT_REFINEMENTS,
) -> list[InequalityCheck]:
    """h(F') - log deg F <= h(F) <= h(F') + 1.26 deg F, for F(0) = 0."""
    if F.coefficient(0) != 0:
        raise ValueError("derivative bound needs F(0) = 0")
    d = F.degree
    dF = derivative(F)

    def lower(prec):
        return coefficient_height(dF, prec) - _log_int(d, prec), coefficient_height(F, prec)

    def upper(prec):
        return coefficient_height(F, prec), coefficient_height(dF, prec) + ROSSER_SCHOENFELD * d

    exact_lower = None
    if F.is_rational():
        def exact_lower():
            return height_integer(dF.coeffs) <= d * height_integer(F.coeffs)

    return [
        _check("derivative-lower", lower, precision, max_refinements, exact_lower),
        _check("derivative-upper", upper, precision, max_refinements),
    ]


def height_inequality_checks(
    F: PolySpec,
    psi: Optional[AffineMap] = None,
    roots: Optional[Sequence] = None,
    precision: int = DEFAULT_PRECISION,
) -> list[InequalityCheck]:
    """Every applicable height inequality for F (and psi / roots when given)."""
    report = []
    if psi is not None:
        report.append(check_affine_height_bound(F, psi, precision))
    if roots is not None:
        report.extend(check_roots_height_bounds(roots, precision))
    if F.coefficient(0) == 0:
        report.extend(check_derivative_height_bounds(F, precision))
    return report
