"""Deciding post-critical finiteness: sieves for z^3 + Az + B and exact certification.

Every elimination carries a witness (place, iterate, starting point, precision)
that :func:`replay_witness` re-checks from scratch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .local_heights import (
    ARCH,
    EscapeRadius,
    HeightBudget,
    Place,
    critical_height,
    cubic_escape_radius,
    escape_radius,
)
from .numerics import (
    INF,
    ComplexInterval,
    DyadicInterval,
    QuadExt,
    as_rational,
    embed,
    padic_valuation,
    prime_divisors,
    quad_minimal_polynomial,
    quad_valuations,
)
from .polyforms import (
    Form,
    PolySpec,
    critical_points,
    critical_points_cubic,
    cubic,
    monic_centred_height,
)

DEFAULT_N_ARCH = 14
DEFAULT_N_PADIC = 14


# -- points and witnesses ----------------------------------------------------


def point_to_json(z) -> dict:
    if isinstance(z, QuadExt) and z.y != 0:
        return {"x": str(z.x), "y": str(z.y), "D": str(z.D)}
    q = z.x if isinstance(z, QuadExt) else z
    return {"x": str(q)}


def point_from_json(data: dict):
    x = Fraction(data["x"])
    if "y" not in data:
        return x
    return QuadExt(x, Fraction(data["y"]), Fraction(data["D"]))


@dataclass(frozen=True)
class EscapeWitness:
    """|F^N(point)|_v exceeds the escape radius at v.

    At the archimedean place ``embedding`` selects x + y sqrt(D) (0) or its
    conjugate (1) and ``precision`` is the working precision that certified
    the comparison. ``radius`` names which radius was used (``"cubic"`` for
    C*, ``"general"`` for C).
    """

    place: Place
    N: int
    point: object
    embedding: int = 0
    precision: Optional[int] = None
    radius: str = "general"
    threshold: str = ""

    def to_json(self) -> dict:
        out = {
            "place": str(self.place),
            "N": self.N,
            "point": point_to_json(self.point),
            "radius": self.radius,
            "threshold": self.threshold,
        }
        if self.place.is_arch:
            out["embedding"] = self.embedding
            out["precision"] = self.precision
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EscapeWitness":
        return cls(
            Place.parse(data["place"]),
            int(data["N"]),
            point_from_json(data["point"]),
            int(data.get("embedding", 0)),
            data.get("precision"),
            data.get("radius", "general"),
            data.get("threshold", ""),
        )

    def compact(self) -> str:
        where = f"{self.place}:N={self.N}:z={_point_str(self.point)}"
        if self.place.is_arch:
            where += f":emb={self.embedding}:prec={self.precision}"
        return where


def _point_str(z) -> str:
    return str(z)


def _radius_for(F: PolySpec, v: Place, kind: str) -> EscapeRadius:
    if kind == "cubic":
        return cubic_escape_radius(F.coefficient(1), F.coefficient(0), v)
    return escape_radius(F, v)


def _uses_cubic_radius(F: PolySpec) -> bool:
    return F.degree == 3 and F.leading == 1 and F.coefficient(2) == 0


def _arch_exceeds(radius: EscapeRadius, y: ComplexInterval) -> Optional[bool]:
    return radius.exceeded_by_abs(y.abs())


def _horner(coeff_iv, y: ComplexInterval) -> ComplexInterval:
    acc = ComplexInterval(coeff_iv[0])
    for c in coeff_iv[1:]:
        acc = acc * y
        acc = ComplexInterval(acc.re + c, acc.im)
    return acc


def _min_valuation(y, p: int):
    """Smallest valuation of y among the places above p (INF for y = 0)."""
    if isinstance(y, QuadExt) and y.y != 0:
        return quad_valuations(y, p)[0]
    q = y.x if isinstance(y, QuadExt) else y
    return padic_valuation(q, p)


def replay_witness(F: PolySpec, witness: EscapeWitness) -> bool:
    """Recompute the witness from scratch; True iff the escape is certified again."""
    radius = _radius_for(F, witness.place, witness.radius)
    if witness.place.is_arch:
        prec = witness.precision or 128
        coeff_iv = [DyadicInterval.exact(c, prec) for c in F.coeffs]
        y = embed(witness.point, prec)[witness.embedding]
        for _ in range(witness.N):
            y = _horner(coeff_iv, y)
        return _arch_exceeds(radius, y) is True
    y = F.iterate(witness.point, witness.N)
    return radius.exceeded_by_valuation(_min_valuation(y, witness.place.p))


# -- sieves --------------------------------------------------------------------


class Stage:
    INTEGRALITY = "integrality"
    ARCH = "arch"
    SURVIVED = "survived"

    @staticmethod
    def padic(p: int) -> str:
        return f"padic{p}"


@dataclass
class SieveReport:
    A: Fraction
    B: Fraction
    eliminated_by: str
    witness: Optional[EscapeWitness] = None
    failing_prime: Optional[int] = None
    iterations: int = 0
    undecided: bool = False

    @property
    def survived(self) -> bool:
        return self.eliminated_by == Stage.SURVIVED

    def to_json(self) -> dict:
        out = {"A": str(self.A), "B": str(self.B), "eliminated_by": self.eliminated_by}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.failing_prime is not None:
            out["failing_prime"] = self.failing_prime
        if self.undecided:
            out["undecided"] = True
        out["iterations"] = self.iterations
        return out


def integrality_sieve(A, B) -> Optional[int]:
    """None if 4A and 8B are integers, else the smallest prime where this fails."""
    A, B = as_rational(A), as_rational(B)
    bad = []
    if (4 * A).denominator != 1:
        bad += prime_divisors((4 * A).denominator)
    if (8 * B).denominator != 1:
        bad += prime_divisors((8 * B).denominator)
    return min(bad) if bad else None


def _sieve_points(A, B) -> list:
    """Critical points whose orbits must be followed, one per conjugate pair."""
    pts = critical_points_cubic(A, B)
    if len(pts) == 2 and isinstance(pts[0].location, QuadExt):
        return [pts[0].location]
    return [cp.location for cp in pts]


def _embeddings(z, prec: int) -> list:
    e1, e2 = embed(z, prec)
    if isinstance(z, QuadExt) and z.y != 0 and z.D > 0:
        return [e1, e2]
    return [e1]


def arch_escape_sieve(
    A, B, N_max: int = DEFAULT_N_ARCH, precision: int = 128, max_refinements: int = 4
) -> SieveReport:
    """Eliminate when some |f^N(+-alpha)| > C*, N <= N_max, is certified by intervals."""
    A, B = as_rational(A), as_rational(B)
    F = cubic(A, B)
    radius = cubic_escape_radius(A, B, ARCH)
    prec = precision
    for _ in range(max_refinements + 1):
        coeff_iv = [DyadicInterval.exact(c, prec) for c in F.coeffs]
        inconclusive = False
        for z in _sieve_points(A, B):
            for idx, y in enumerate(_embeddings(z, prec)):
                for n in range(N_max + 1):
                    if n:
                        y = _horner(coeff_iv, y)
                    verdict = _arch_exceeds(radius, y)
                    if verdict:
                        w = EscapeWitness(ARCH, n, z, idx, prec, "cubic", radius.describe())
                        return SieveReport(A, B, Stage.ARCH, w, iterations=n)
                    if verdict is None:
                        inconclusive = True
        if not inconclusive:
            return SieveReport(A, B, Stage.SURVIVED, iterations=N_max)
        prec *= 2
    return SieveReport(A, B, Stage.SURVIVED, iterations=N_max, undecided=True)


def padic_escape_sieve(A, B, p: int, N_max: int = DEFAULT_N_PADIC, max_bits: int = 1 << 16) -> SieveReport:
    """Eliminate when some |f^N(+-alpha)|_w > C*_{f,w} at a place w above p (exact)."""
    A, B = as_rational(A), as_rational(B)
    F = cubic(A, B)
    radius = cubic_escape_radius(A, B, Place(p))
    for z in _sieve_points(A, B):
        y = z
        seen = set()
        for n in range(N_max + 1):
            if n:
                y = F(y)
            if y in seen:
                break
            seen.add(y)
            if radius.exceeded_by_valuation(_min_valuation(y, p)):
                w = EscapeWitness(Place(p), n, z, radius="cubic", threshold=radius.describe())
                return SieveReport(A, B, Stage.padic(p), w, iterations=n)
            if _bits(y) > max_bits:
                break
    return SieveReport(A, B, Stage.SURVIVED, iterations=N_max)


def _bits(y) -> int:
    if isinstance(y, QuadExt):
        return y.bit_size()
    return abs(y.numerator).bit_length() + y.denominator.bit_length()


# -- certification ---------------------------------------------------------------


@dataclass
class CriticalOrbit:
    point: object
    multiplicity: int
    points: list
    tail: int
    period: int

    def verify(self, F: PolySpec) -> bool:
        """The recorded orbit is closed under one more application of F."""
        pts = self.points
        for a, b in zip(pts, pts[1:]):
            if F(a) != b:
                return False
        return F(pts[-1]) == pts[self.tail]

    def to_json(self) -> dict:
        return {
            "point": point_to_json(self.point),
            "multiplicity": self.multiplicity,
            "orbit": [str(q) for q in self.points],
            "tail": self.tail,
            "period": self.period,
        }


@dataclass
class Pcf:
    orbits: list
    iterations: int
    name: str = field(default="Pcf", init=False)

    @property
    def orbit_len(self) -> int:
        return max(len(o.points) for o in self.orbits)


@dataclass
class NotPcf:
    witness: EscapeWitness
    iterations: int
    name: str = field(default="NotPcf", init=False)


@dataclass
class Undecided:
    iterations: int
    reason: str
    name: str = field(default="Undecided", init=False)


PcfVerdict = Union[Pcf, NotPcf, Undecided]


def _relevant_primes(F: PolySpec, points) -> list[int]:
    den = 1
    for c in F.coeffs:
        den *= c.denominator
    for z in points:
        for q in quad_minimal_polynomial(z):
            den *= q.denominator
    return prime_divisors(den) if den > 1 else []


def _canon(y, z):
    if isinstance(y, QuadExt) and y.y == 0 and not isinstance(z, QuadExt):
        return y.x
    return y


def certify_pcf(F: PolySpec, budget: HeightBudget = HeightBudget()) -> PcfVerdict:
    """Follow every critical orbit exactly until it closes up or provably escapes."""
    if not F.is_rational():
        raise ValueError("certification needs rational coefficients")
    cps = critical_points(F)
    kind = "cubic" if _uses_cubic_radius(F) else "general"
    places = [ARCH] + [Place(p) for p in _relevant_primes(F, [c.location for c in cps])]
    radii = {v: _radius_for(F, v, kind) for v in places}
    prec = budget.precision
    coeff_iv = [DyadicInterval.exact(c, prec) for c in F.coeffs]

    orbits = []
    total = 0
    for cp in cps:
        z = cp.location
        points = [z]
        index = {z: 0}
        arch = _embeddings(z, prec)
        closed = None
        for n in range(budget.max_iterations + 1):
            y = points[-1]
            for v in places[1:]:
                if radii[v].exceeded_by_valuation(_min_valuation(y, v.p)):
                    w = EscapeWitness(v, n, z, radius=kind, threshold=radii[v].describe())
                    return NotPcf(w, total + n)
            for idx, e in enumerate(arch):
                if _arch_exceeds(radii[ARCH], e):
                    w = EscapeWitness(ARCH, n, z, idx, prec, kind, radii[ARCH].describe())
                    return NotPcf(w, total + n)
            nxt = _canon(F(y), z)
            if nxt in index:
                closed = index[nxt]
                total += n + 1
                break
            if _bits(nxt) > budget.max_bits:
                return Undecided(total + n, f"orbit of {z} outgrew {budget.max_bits} bits")
            index[nxt] = len(points)
            points.append(nxt)
            arch = [_horner(coeff_iv, e) for e in arch]
        if closed is None:
            return Undecided(total + budget.max_iterations, f"orbit of {z} neither closed nor escaped")
        orbits.append(CriticalOrbit(z, cp.multiplicity, points, closed, len(points) - closed))
    return Pcf(orbits, total)


# -- serialization -------------------------------------------------------------------


def verdict_record(A, B, verdict: PcfVerdict) -> dict:
    """JSON-lines record {A, B, verdict, witness?, orbit?, iterations}."""
    out = {"A": str(as_rational(A)), "B": str(as_rational(B)), "verdict": verdict.name}
    if isinstance(verdict, NotPcf):
        out["witness"] = verdict.witness.to_json()
    elif isinstance(verdict, Pcf):
        out["orbit"] = [o.to_json() for o in verdict.orbits]
    else:
        out["reason"] = verdict.reason
    out["iterations"] = verdict.iterations
    return out


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def replay_record(record: dict) -> bool:
    """Re-check a serialized NotPcf verdict or sieve elimination for z^3 + Az + B."""
    F = cubic(record["A"], record["B"])
    witness = record.get("witness")
    if witness is None:
        return False
    return replay_witness(F, EscapeWitness.from_json(witness))


# -- Theorem 1 diagnostic --------------------------------------------------------------


@dataclass
class RatioReport:
    h_crit: DyadicInterval
    h_mc: DyadicInterval
    ratio: DyadicInterval

    def to_json(self) -> dict:
        return {
            "h_crit": self.h_crit.format(),
            "h_mc": self.h_mc.format(),
            "ratio": self.ratio.format(),
        }


def theorem1_ratio(F: PolySpec, budget: HeightBudget = HeightBudget()) -> RatioReport:
    """Enclosures of h_crit(F), h_mc(F) and h_crit / h_mc."""
    h_mc = monic_centred_height(F, budget.precision)
    if h_mc.gt(0) is not True:
        raise ValueError("h_mc must be certified positive")
    h_crit = critical_height(F, budget)
    return RatioReport(h_crit, h_mc, h_crit / h_mc)
