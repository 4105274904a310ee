"""Candidate grids, the sieve pipeline, and family scans for the height ratio."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

from .local_heights import HeightBudget, critical_height
from .numerics import height
from .pcf import (
    DEFAULT_N_ARCH,
    DEFAULT_N_PADIC,
    NotPcf,
    Pcf,
    Stage,
    Undecided,
    arch_escape_sieve,
    certify_pcf,
    integrality_sieve,
    padic_escape_sieve,
    verdict_record,
)
from .polyforms import PolySpec, cubic, monic_centred_height, quadratic

A_RANGE = range(-20, 21)
B_RANGE = range(0, 95)
QUADRATIC_RANGE = range(-2, 3)

CSV_HEADER = ["a", "b", "A", "B", "stage", "verdict", "witness", "orbit_len"]


@dataclass(frozen=True)
class EnumerationConfig:
    degree: int = 3
    n_arch: int = DEFAULT_N_ARCH
    n_padic: int = DEFAULT_N_PADIC
    precision: int = 128
    max_refinements: int = 4
    primes: tuple = (2, 3)
    strict: bool = False
    workers: int = 1
    max_iterations: int = 64

    def __post_init__(self):
        if self.degree not in (2, 3):
            raise ValueError("enumeration covers degrees 2 and 3")
        if self.n_arch < 0 or self.n_padic < 0:
            raise ValueError("iteration bounds must be nonnegative")
        if self.precision < 16:
            raise ValueError("precision must be at least 16 bits")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        object.__setattr__(self, "primes", tuple(int(p) for p in self.primes))

    def budget(self) -> HeightBudget:
        return HeightBudget(self.max_iterations, self.precision, self.max_refinements)

    def snapshot(self) -> dict:
        """Settings that affect results (worker count does not)."""
        out = asdict(self)
        out["primes"] = list(self.primes)
        del out["workers"]
        return out

    def digest(self) -> str:
        text = json.dumps(self.snapshot(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_text(text: str, base: Optional[EnumerationConfig] = None) -> EnumerationConfig:
    """Read ``key = value`` lines (``#`` comments allowed) over a base config."""
    values = asdict(base or EnumerationConfig())
    known = {f.name for f in fields(EnumerationConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if key == "n_max":
            key = "n_arch"
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key == "strict":
            values[key] = _parse_bool(value)
        elif key == "primes":
            values[key] = tuple(int(p) for p in value.replace(",", " ").split())
        else:
            values[key] = int(value)
    return EnumerationConfig(**values)


def load_config(path) -> EnumerationConfig:
    return parse_config_text(Path(path).read_text())


# -- grids -----------------------------------------------------------------


def cubic_candidate_grid() -> list[tuple[int, int]]:
    """(a, b) with A = a/4, B = b/8; a ascending, then b ascending."""
    return [(a, b) for a in A_RANGE for b in B_RANGE]


def quadratic_candidate_grid() -> list[int]:
    return list(QUADRATIC_RANGE)


# -- per-candidate pipeline -----------------------------------------------------


@dataclass
class CandidateResult:
    a: int
    b: int
    A: Fraction
    B: Fraction
    stage: str
    verdict: str
    witness: str = ""
    orbit_len: int = 0
    record: dict = field(default_factory=dict)
    arch_undecided: bool = False

    def csv_row(self) -> list:
        return [self.a, self.b, str(self.A), str(self.B), self.stage, self.verdict, self.witness, self.orbit_len]


def classify_cubic(a: int, b: int, config: EnumerationConfig) -> CandidateResult:
    A, B = Fraction(a, 4), Fraction(b, 8)
    bad = integrality_sieve(A, B)
    if bad is not None:
        rec = {"A": str(A), "B": str(B), "verdict": "NotPcf", "failing_prime": bad, "iterations": 0}
        return CandidateResult(a, b, A, B, Stage.INTEGRALITY, "NotPcf", f"denominator at {bad}", 0, rec)
    rep = arch_escape_sieve(A, B, config.n_arch, config.precision, config.max_refinements)
    arch_undecided = rep.undecided
    if not rep.survived:
        return _eliminated(a, b, rep)
    for p in config.primes:
        rep = padic_escape_sieve(A, B, p, config.n_padic)
        if not rep.survived:
            return _eliminated(a, b, rep, arch_undecided)
    verdict = certify_pcf(cubic(A, B), config.budget())
    rec = verdict_record(A, B, verdict)
    if isinstance(verdict, Pcf):
        return CandidateResult(a, b, A, B, Stage.SURVIVED, "Pcf", "", verdict.orbit_len, rec, arch_undecided)
    if isinstance(verdict, NotPcf):
        return CandidateResult(a, b, A, B, "certify", "NotPcf", verdict.witness.compact(), 0, rec, arch_undecided)
    return CandidateResult(a, b, A, B, Stage.SURVIVED, "Undecided", verdict.reason, 0, rec, arch_undecided)


def _eliminated(a: int, b: int, rep, arch_undecided: bool = False) -> CandidateResult:
    rec = {"A": str(rep.A), "B": str(rep.B), "verdict": "NotPcf", "witness": rep.witness.to_json(),
           "iterations": rep.iterations, "stage": rep.eliminated_by}
    return CandidateResult(
        a, b, rep.A, rep.B, rep.eliminated_by, "NotPcf", rep.witness.compact(), 0, rec, arch_undecided
    )


def _classify_chunk(args) -> list[CandidateResult]:
    chunk, config = args
    return [classify_cubic(a, b, config) for a, b in chunk]


def _chunks(items: list, n: int) -> list[list]:
    size = max(1, -(-len(items) // n))
    return [items[i : i + size] for i in range(0, len(items), size)]


# -- results ---------------------------------------------------------------------


class StrictModeError(RuntimeError):
    def __init__(self, result: "EnumerationResult"):
        super().__init__(f"{len(result.undecided)} undecided candidates in strict mode")
        self.result = result


@dataclass
class EnumerationResult:
    degree: int
    rows: list
    final: list
    stage_counts: dict
    undecided: list
    config: EnumerationConfig

    def final_strings(self) -> list[str]:
        if self.degree == 2:
            return [str(c) for c in self.final]
        return [f"({A}, {B})" for A, B in self.final]

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "config": self.config.snapshot(),
            "config_digest": self.config.digest(),
            "stage_counts": self.stage_counts,
            "final": [str(c) for c in self.final]
            if self.degree == 2
            else [[str(A), str(B)] for A, B in self.final],
            "undecided": [[str(r.A), str(r.B)] if self.degree == 3 else str(r.A) for r in self.undecided],
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_row())
        return buf.getvalue()

    def jsonl_text(self) -> str:
        return "".join(json.dumps(r.record, sort_keys=True, separators=(",", ":")) + "\n" for r in self.rows)

    def write(self, directory) -> dict:
        """Write results.csv, verdicts.jsonl and summary.json; return their paths."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "csv": out / "results.csv",
            "jsonl": out / "verdicts.jsonl",
            "summary": out / "summary.json",
        }
        paths["csv"].write_text(self.csv_text())
        paths["jsonl"].write_text(self.jsonl_text())
        paths["summary"].write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return paths


def _stage_counts(rows: list, stages: list) -> dict:
    counts = {"grid": len(rows)}
    remaining = len(rows)
    for stage in stages:
        gone = sum(1 for r in rows if r.stage == stage)
        remaining -= gone
        counts[f"eliminated_{stage}"] = gone
        counts[f"after_{stage}"] = remaining
    counts["pcf"] = sum(1 for r in rows if r.verdict == "Pcf")
    counts["undecided"] = sum(1 for r in rows if r.verdict == "Undecided")
    counts["arch_undecided"] = sum(1 for r in rows if r.arch_undecided)
    return counts


def enumerate_pcf_cubics(config: EnumerationConfig = EnumerationConfig()) -> EnumerationResult:
    """Grid, then archimedean sieve, p-adic sieves, and exact certification."""
    grid = cubic_candidate_grid()
    if config.workers > 1:
        jobs = [(chunk, config) for chunk in _chunks(grid, config.workers * 4)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = [r for part in pool.map(_classify_chunk, jobs) for r in part]
    else:
        rows = _classify_chunk((grid, config))
    stages = [Stage.INTEGRALITY, Stage.ARCH] + [Stage.padic(p) for p in config.primes] + ["certify"]
    counts = _stage_counts(rows, stages)
    final = set()
    for r in rows:
        if r.verdict == "Pcf":
            final.add((r.A, r.B))
            final.add((r.A, -r.B))
    counts["final_with_twins"] = len(final)
    undecided = [r for r in rows if r.verdict == "Undecided"]
    result = EnumerationResult(3, rows, sorted(final), counts, undecided, config)
    if config.strict and undecided:
        raise StrictModeError(result)
    return result


def enumerate_pcf_quadratics(config: EnumerationConfig = EnumerationConfig(degree=2)) -> EnumerationResult:
    """z^2 + c over c in {-2, ..., 2}: integral at every prime and |c| <= 2."""
    rows = []
    for c in quadratic_candidate_grid():
        C = Fraction(c)
        verdict = certify_pcf(quadratic(C), config.budget())
        rec = verdict_record(C, 0, verdict)
        rec = {"c": rec.pop("A"), **{k: v for k, v in rec.items() if k != "B"}}
        if isinstance(verdict, Pcf):
            rows.append(CandidateResult(c, 0, C, Fraction(0), Stage.SURVIVED, "Pcf", "", verdict.orbit_len, rec))
        elif isinstance(verdict, NotPcf):
            rows.append(CandidateResult(c, 0, C, Fraction(0), "certify", "NotPcf", verdict.witness.compact(), 0, rec))
        else:
            rows.append(CandidateResult(c, 0, C, Fraction(0), Stage.SURVIVED, "Undecided", verdict.reason, 0, rec))
    counts = _stage_counts(rows, ["certify"])
    final = sorted(r.A for r in rows if r.verdict == "Pcf")
    undecided = [r for r in rows if r.verdict == "Undecided"]
    result = EnumerationResult(2, rows, final, counts, undecided, config)
    if config.strict and undecided:
        raise StrictModeError(result)
    return result


# -- family scans -------------------------------------------------------------------

UNICRITICAL = "unicritical"
SUPERATTRACTING_ZERO = "superattracting-zero"
FAMILIES = (UNICRITICAL, SUPERATTRACTING_ZERO)
FAMILY_HEADER = ["family", "d", "c", "h_c", "h_crit", "h_mc", "ratio_mc", "ratio_c"]


def family_member(family: str, d: int, c) -> PolySpec:
    """z^d + c, or z^d - (d c / (d - 1)) z^(d-1)."""
    c = Fraction(c)
    if d < 2:
        raise ValueError("degree must be at least 2")
    if family == UNICRITICAL:
        return PolySpec((Fraction(1),) + (Fraction(0),) * (d - 1) + (c,))
    if family == SUPERATTRACTING_ZERO:
        return PolySpec((Fraction(1), -Fraction(d, d - 1) * c) + (Fraction(0),) * (d - 1))
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


def family_target(family: str, d: int) -> Fraction:
    return Fraction(d - 1, d) if family == UNICRITICAL else Fraction(1, d)


@dataclass
class FamilyRow:
    family: str
    d: int
    c: Fraction
    h_c: object
    h_crit: object
    h_mc: object
    ratio_mc: object
    ratio_c: object

    def cells(self, exact: bool = False) -> list:
        def fmt(x):
            if x is None:
                return "undefined"
            if exact:
                lo, hi = x.dyadic_endpoints()
                return f"[{lo}, {hi}]"
            return x.format()

        return [self.family, self.d, str(self.c)] + [
            fmt(x) for x in (self.h_c, self.h_crit, self.h_mc, self.ratio_mc, self.ratio_c)
        ]


def family_scan(family: str, d: int, c_values: Iterable, budget: HeightBudget = HeightBudget()) -> list[FamilyRow]:
    rows = []
    for c in c_values:
        c = Fraction(c)
        F = family_member(family, d, c)
        h_crit = critical_height(F, budget)
        h_mc = monic_centred_height(F, budget.precision)
        h_c = height(c, budget.precision)
        ratio_mc = h_crit / h_mc if h_mc.gt(0) else None
        ratio_c = h_crit / h_c if h_c.gt(0) else None
        rows.append(FamilyRow(family, d, c, h_c, h_crit, h_mc, ratio_mc, ratio_c))
    return rows


def family_csv(rows: list[FamilyRow], exact: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FAMILY_HEADER)
    for r in rows:
        w.writerow(r.cells(exact))
    return buf.getvalue()


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
