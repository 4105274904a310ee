"""Escape radii, local canonical heights with rigorous error control, and global heights.

Local heights of a point of Q(sqrt(D)) are averaged over its two conjugates
(equivalently over the places of Q(sqrt(D)) above v), so that the canonical
height is simply the sum of the local values over the places of Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .numerics import (
    DEFAULT_PRECISION,
    DEFAULT_REFINEMENTS,
    INF,
    ComplexInterval,
    DyadicInterval,
    QuadExt,
    as_rational,
    embed,
    height,
    padic_valuation,
    prime_divisors,
    quad_minimal_polynomial,
    quad_valuations,
)
from .polyforms import PolySpec, coefficient_height, critical_points


@dataclass(frozen=True, order=True)
class Place:
    """The archimedean place (``p is None``) or the p-adic place of Q."""

    rank: int = field(init=False, repr=False)
    p: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "rank", 0 if self.p is None else self.p)

    @property
    def is_arch(self) -> bool:
        return self.p is None

    def __str__(self) -> str:
        return "inf" if self.p is None else str(self.p)

    @classmethod
    def parse(cls, text: str) -> "Place":
        text = str(text).strip().lower()
        if text in ("inf", "arch", "oo", "infinity"):
            return ARCH
        return cls(int(text))


ARCH = Place()


def Prime(p: int) -> Place:
    return Place(p)


@dataclass(frozen=True)
class HeightBudget:
    max_iterations: int = 64
    precision: int = DEFAULT_PRECISION
    max_refinements: int = DEFAULT_REFINEMENTS
    # exact orbits whose elements outgrow this many bits are abandoned
    max_bits: int = 1 << 16

    def __post_init__(self):
        if min(self.max_iterations, self.precision, self.max_refinements + 1, self.max_bits) <= 0:
            raise ValueError("budget fields must be positive")


class HeightUndecided(RuntimeError):
    """A local estimate could not be enclosed within the budget."""

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


@dataclass
class LocalHeightEstimate:
    place: Place
    value: DyadicInterval
    iterations: int
    exact: bool = False

    def to_json(self) -> dict:
        lo, hi = self.value.dyadic_endpoints()
        return {
            "place": str(self.place),
            "lo": lo,
            "hi": hi,
            "value": self.value.format(),
            "iterations": self.iterations,
        }


# -- escape radii -----------------------------------------------------------


@dataclass(frozen=True)
class EscapeRadius:
    """Threshold C at a place.

    At the archimedean place C = max_j r_j**(1/k_j) over ``terms``; comparisons
    raise both sides to the k_j-th power so no roots are taken. At p, C = p**exponent.
    """

    place: Place
    terms: tuple = ()
    exponent: Fraction = Fraction(0)

    def exceeded_by_abs(self, a: DyadicInterval) -> Optional[bool]:
        """Three-valued |z| > C from an enclosure of |z| (archimedean)."""
        verdict = True
        for r, k in self.terms:
            v = (a**k).gt(r)
            if v is False:
                return False
            if v is None:
                verdict = None
        return verdict

    def exceeded_by_valuation(self, w) -> bool:
        """|z|_w = p**(-w) > C, exactly (non-archimedean)."""
        return w != INF and -w > self.exponent

    def log(self, prec: int = DEFAULT_PRECISION) -> DyadicInterval:
        if self.place.is_arch:
            logs = [DyadicInterval.exact(r, prec).log() * Fraction(1, k) for r, k in self.terms if r > 0]
            out = logs[0]
            for item in logs[1:]:
                out = out.max_with(item)
            return out
        return DyadicInterval.exact(self.place.p, prec).log() * self.exponent

    def describe(self) -> str:
        if self.place.is_arch:
            return "max(" + ", ".join(f"({r})^(1/{k})" for r, k in self.terms) + ")"
        return f"{self.place.p}^({self.exponent})"


def _rational_coeffs(F: PolySpec) -> None:
    if not F.is_rational():
        raise ValueError("dynamics is implemented for rational coefficients")


def escape_radius(F: PolySpec, v: Place) -> EscapeRadius:
    """C_{f,v} = (2d)_v max{1, |a_i/a_d|^(1/(d-i)), |a_d|^(-1/(d-1))}."""
    _rational_coeffs(F)
    d = F.degree
    a_d = F.coefficient(d)
    if v.is_arch:
        two_d = Fraction(2 * d)
        terms = [(two_d, 1)]
        for i in range(d):
            a_i = F.coefficient(i)
            if a_i != 0:
                terms.append((two_d ** (d - i) * abs(a_i / a_d), d - i))
        terms.append((two_d ** (d - 1) / abs(a_d), d - 1))
        return EscapeRadius(v, tuple(terms))
    p = v.p
    exponent = Fraction(0)
    for i in range(d):
        a_i = F.coefficient(i)
        if a_i != 0:
            exponent = max(exponent, -padic_valuation(a_i / a_d, p) / (d - i))
    exponent = max(exponent, padic_valuation(a_d, p) / (d - 1))
    return EscapeRadius(v, exponent=exponent)


def cubic_escape_radius(A, B, v: Place) -> EscapeRadius:
    """C*_{f,v} = (2)_v max{1, |A|^(1/2), |B|^(1/3)} for z^3 + A z + B."""
    A, B = as_rational(A), as_rational(B)
    if v.is_arch:
        terms = [(Fraction(2), 1)]
        if A != 0:
            terms.append((4 * abs(A), 2))
        if B != 0:
            terms.append((8 * abs(B), 3))
        return EscapeRadius(v, tuple(terms))
    exponent = Fraction(0)
    if A != 0:
        exponent = max(exponent, -padic_valuation(A, v.p) / 2)
    if B != 0:
        exponent = max(exponent, -padic_valuation(B, v.p) / 3)
    return EscapeRadius(v, exponent=exponent)


# -- exact orbits -------------------------------------------------------------


def _size(z) -> int:
    if isinstance(z, QuadExt):
        return z.bit_size()
    return abs(z.numerator).bit_length() + z.denominator.bit_length()


@dataclass
class ExactOrbit:
    """Forward orbit z, F(z), ... as computed exactly.

    ``tail`` and ``period`` are set when the orbit closed up: points[tail:] is
    the cycle and F(points[-1]) == points[tail].
    """

    points: list
    tail: Optional[int] = None
    period: Optional[int] = None
    truncated: bool = False

    @property
    def preperiodic(self) -> bool:
        return self.period is not None


def exact_orbit(F: PolySpec, z, max_steps: int, max_bits: int = 1 << 16) -> ExactOrbit:
    """Iterate exactly until the orbit repeats, runs out of steps, or outgrows ``max_bits``."""
    seen = {z: 0}
    points = [z]
    for _ in range(max_steps):
        nxt = F(points[-1])
        if isinstance(nxt, QuadExt) and nxt.y == 0 and not isinstance(z, QuadExt):
            nxt = nxt.x
        if nxt in seen:
            tail = seen[nxt]
            return ExactOrbit(points, tail, len(points) - tail)
        if _size(nxt) > max_bits:
            return ExactOrbit(points, truncated=True)
        seen[nxt] = len(points)
        points.append(nxt)
    return ExactOrbit(points)


# -- archimedean local height ---------------------------------------------------


def _horner(coeff_iv: list, y: ComplexInterval) -> ComplexInterval:
    acc = ComplexInterval(coeff_iv[0])
    for c in coeff_iv[1:]:
        acc = acc * y
        acc = ComplexInterval(acc.re + c, acc.im)
    return acc


def _telescoping_constant(F: PolySpec, v: Place, prec: int) -> DyadicInterval:
    """K with log max(1,|F(y)|) <= d log max(1,|y|) + K at v."""
    if v.is_arch:
        m = max(Fraction(1), max(abs(c) for c in F.coeffs))
        return DyadicInterval.exact(m * (F.degree + 1), prec).log()
    e = max(Fraction(0), max(-padic_valuation(c, v.p) for c in F.coeffs if c != 0))
    return DyadicInterval.exact(v.p, prec).log() * e


def _arch_single(F: PolySpec, y0: ComplexInterval, budget: HeightBudget, prec: int):
    """lambda_inf along one embedding; returns (enclosure, iterations, conclusive)."""
    d = F.degree
    radius = escape_radius(F, ARCH)
    coeff_iv = [DyadicInterval.exact(c, prec) for c in F.coeffs]
    log_ad = DyadicInterval.exact(abs(F.leading), prec).log() * Fraction(1, d - 1)
    eps = DyadicInterval(
        (-DyadicInterval.exact(2, prec).log()).lo_raw,
        DyadicInterval.exact(Fraction(3, 2), prec).log().hi_raw,
        prec,
    )
    one = DyadicInterval.exact(1, prec)
    y = y0
    best: Optional[DyadicInterval] = None
    conclusive = True
    scale = Fraction(1)
    n = 0
    while True:
        a = y.abs()
        escaped = radius.exceeded_by_abs(a)
        if escaped is None:
            conclusive = False
        if escaped:
            estimate = (a.log() + log_ad + eps) * scale
            if best is None:
                best = estimate
            elif best.intersects(estimate):
                best = best.intersect(estimate)
            if scale * 2**prec <= 1 or n >= budget.max_iterations:
                return best, n, True
        elif best is not None:
            # precision ran out after escape: keep what was certified
            return best, n, True
        if n >= budget.max_iterations:
            break
        y = _horner(coeff_iv, y)
        n += 1
        scale /= d
        if best is not None and y.abs().lo <= 0:
            return best, n, True
    # no certified escape: bounded-orbit enclosure [0, d^-n * U(y_n)]
    k = _telescoping_constant(F, ARCH, prec) * Fraction(1, d - 1)
    upper = (a.max_with(one).log() + k) * scale
    return DyadicInterval(DyadicInterval.zero(prec).lo_raw, upper.hi_raw, prec), n, conclusive


def _arch_local(F: PolySpec, z, budget: HeightBudget) -> LocalHeightEstimate:
    prec = budget.precision
    result = None
    for _ in range(budget.max_refinements + 1):
        e1, e2 = embed(z, prec)
        distinct = e1 is not e2 and not (isinstance(z, QuadExt) and z.D < 0)
        est1, n1, ok1 = _arch_single(F, e1, budget, prec)
        if distinct:
            est2, n2, ok2 = _arch_single(F, e2, budget, prec)
            value = (est1 + est2) * Fraction(1, 2)
            n, ok = max(n1, n2), ok1 and ok2
        else:
            value, n, ok = est1, n1, ok1
        result = LocalHeightEstimate(ARCH, value, n)
        if ok:
            return result
        prec *= 2
    return result


# -- non-archimedean local height -------------------------------------------------


def _integral_at(F: PolySpec, p: int) -> bool:
    return all(c == 0 or padic_valuation(c, p) >= 0 for c in F.coeffs)


def _components(y, p: int) -> list:
    """Valuations of y at the places above p (two entries for irrational y)."""
    if isinstance(y, QuadExt) and y.y != 0:
        return list(quad_valuations(y, p))
    q = y.x if isinstance(y, QuadExt) else y
    return [padic_valuation(q, p)]


def _padic_local(F: PolySpec, z, p: int, budget: HeightBudget) -> LocalHeightEstimate:
    prec = budget.precision
    v = Place(p)
    d = F.degree
    radius = escape_radius(F, v)
    integral = _integral_at(F, p)
    log_p = DyadicInterval.exact(p, prec).log()
    shift = padic_valuation(F.leading, p) / (d - 1)
    y = z
    scale = Fraction(1)
    n = 0
    while True:
        comps = _components(y, p)
        values = []
        pending = []
        for w in comps:
            if radius.exceeded_by_valuation(w):
                values.append(log_p * ((-w - shift) * scale))
            elif integral and w >= 0:
                values.append(DyadicInterval.zero(prec))
            else:
                pending.append(w)
        if not pending or n >= budget.max_iterations or _size(y) > budget.max_bits:
            k = _telescoping_constant(F, v, prec) * Fraction(1, d - 1)
            for w in pending:
                top = log_p * (max(Fraction(0), -w) * scale) + k * scale if w != INF else k * scale
                values.append(DyadicInterval(DyadicInterval.zero(prec).lo_raw, top.hi_raw, prec))
            total = values[0]
            for item in values[1:]:
                total = total + item
            exact = not pending
            return LocalHeightEstimate(v, total * Fraction(1, len(comps)), n, exact)
        y = F(y)
        n += 1
        scale /= d


# -- public API ---------------------------------------------------------------------


def local_canonical_height(
    F: PolySpec, z, v: Place, budget: HeightBudget = HeightBudget()
) -> LocalHeightEstimate:
    """Enclosure of the local canonical height of z at v (averaged over conjugates of z)."""
    _rational_coeffs(F)
    if F.degree < 2:
        raise ValueError("degree must be at least 2")
    orbit = exact_orbit(F, z, budget.max_iterations, budget.max_bits)
    if orbit.preperiodic:
        return LocalHeightEstimate(v, DyadicInterval.zero(budget.precision), len(orbit.points), True)
    if v.is_arch:
        return _arch_local(F, z, budget)
    return _padic_local(F, z, v.p, budget)


def relevant_primes(F: PolySpec, z) -> list[int]:
    """Primes at which the local height of z can be nonzero.

    Outside these, F and z are integral, so the orbit stays in the unit ball.
    """
    dens = 1
    for c in F.coeffs:
        dens *= as_rational(c).denominator
    for q in quad_minimal_polynomial(z):
        dens *= q.denominator
    return prime_divisors(dens) if dens > 1 else []


@dataclass
class CanonicalHeight:
    value: DyadicInterval
    local: list
    exact: bool = False

    def to_json(self) -> dict:
        lo, hi = self.value.dyadic_endpoints()
        return {
            "value": self.value.format(),
            "lo": lo,
            "hi": hi,
            "exact_zero": self.exact and self.value.is_zero(),
            "places": [e.to_json() for e in self.local],
        }


def canonical_height_report(F: PolySpec, z, budget: HeightBudget = HeightBudget()) -> CanonicalHeight:
    """Canonical height with its per-place breakdown (archimedean first, then primes ascending)."""
    _rational_coeffs(F)
    prec = budget.precision
    orbit = exact_orbit(F, z, budget.max_iterations, budget.max_bits)
    if orbit.preperiodic:
        zero = LocalHeightEstimate(ARCH, DyadicInterval.zero(prec), len(orbit.points), True)
        return CanonicalHeight(DyadicInterval.zero(prec), [zero], True)
    places = [ARCH] + [Place(p) for p in relevant_primes(F, z)]
    local = [
        _arch_local(F, z, budget) if v.is_arch else _padic_local(F, z, v.p, budget)
        for v in places
    ]
    total = DyadicInterval.zero(prec)
    for est in local:
        total = total + est.value
    return CanonicalHeight(total, local, all(e.exact for e in local))


def canonical_height(F: PolySpec, z, budget: HeightBudget = HeightBudget()) -> DyadicInterval:
    """Enclosure of the canonical height of z (z rational or in Q(sqrt(D)))."""
    return canonical_height_report(F, z, budget).value


def critical_height(F: PolySpec, budget: HeightBudget = HeightBudget()) -> DyadicInterval:
    """Sum of canonical heights of the finite critical points, with multiplicity."""
    total = DyadicInterval.zero(budget.precision)
    done: dict = {}
    for cp in critical_points(F):
        loc = cp.location
        key = loc.conj() if isinstance(loc, QuadExt) and loc.conj() in done else loc
        if key not in done:
            done[key] = canonical_height(F, loc, budget)
        total = total + done[key] * cp.multiplicity
    return total


def canonical_height_upper_bound(F: PolySpec, z, precision: int = DEFAULT_PRECISION) -> DyadicInterval:
    """h(z) + (h(a_d, ..., a_0) + log(d + 1)) / (d - 1)."""
    d = F.degree
    extra = coefficient_height(F, precision) + DyadicInterval.exact(d + 1, precision).log()
    return height(z, precision) + extra * Fraction(1, d - 1)


Point = Union[Fraction, QuadExt]
