"""Command-line interface: ``critheight {height,certify,enumerate,family-scan}``.

Exit codes: 0 success (Pcf for ``certify``), 1 NotPcf, 2 usage or parse
error, 3 undecided within budget, 4 strict-mode failure.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from .enumeration import (
    FAMILIES,
    EnumerationConfig,
    StrictModeError,
    enumerate_pcf_cubics,
    enumerate_pcf_quadratics,
    family_csv,
    family_scan,
    load_config,
)
from .local_heights import HeightBudget, HeightUndecided, canonical_height_report
from .numerics import DEFAULT_PRECISION
from .parsing import ParseError, parse_point, parse_polynomial
from .pcf import NotPcf, Pcf, certify_pcf, dumps_record, verdict_record
from .polyforms import cubic, quadratic

EXIT_OK = 0
EXIT_NOT_PCF = 1
EXIT_USAGE = 2
EXIT_UNDECIDED = 3
EXIT_STRICT = 4

PRECISION_ENV = "CRITHEIGHT_PRECISION"


class UsageError(Exception):
    pass


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None
    if value < 16:
        raise UsageError(f"{PRECISION_ENV} must be at least 16")
    return value


def _interval_text(x, exact: bool) -> str:
    if exact:
        lo, hi = x.dyadic_endpoints()
        return f"[{lo}, {hi}]"
    return x.format()


def _budget(args) -> HeightBudget:
    precision = args.precision if args.precision is not None else default_precision()
    return HeightBudget(max_iterations=args.iterations, precision=precision)


# -- commands ---------------------------------------------------------------------


def cmd_height(args, out) -> int:
    F = parse_polynomial(args.poly)
    z = parse_point(args.point)
    if not F.is_rational() or F.degree < 2:
        raise UsageError("height needs a rational polynomial of degree >= 2")
    try:
        report = canonical_height_report(F, z, _budget(args))
    except HeightUndecided as exc:
        print(f"undecided after {exc.iterations} iterations: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    if args.format == "json":
        data = {"poly": str(F), "point": str(z), **report.to_json()}
        if not args.verbose:
            data.pop("places")
        print(json.dumps(data, sort_keys=True), file=out)
        return EXIT_OK
    if report.exact and report.value.is_zero():
        print("0 (preperiodic)", file=out)
    else:
        print(_interval_text(report.value, args.exact), file=out)
    if args.verbose:
        for est in report.local:
            print(f"  {est.place}: {_interval_text(est.value, args.exact)} ({est.iterations} iterations)", file=out)
    return EXIT_OK


def cmd_certify(args, out) -> int:
    if args.cubic is not None:
        A, B = (Fraction(s) for s in args.cubic)
        F = cubic(A, B)
    elif args.quadratic is not None:
        A, B = Fraction(args.quadratic), None
        F = quadratic(A)
    elif args.poly is not None:
        F = parse_polynomial(args.poly)
        A = B = None
    else:
        raise UsageError("certify needs --cubic A B, --quadratic c, or a polynomial")
    verdict = certify_pcf(F, _budget(args))
    record = verdict_record(A if A is not None else 0, B if B is not None else 0, verdict)
    if args.cubic is None:
        del record["A"], record["B"]
        record["poly"] = str(F)
    print(dumps_record(record), file=out)
    if isinstance(verdict, Pcf):
        return EXIT_OK
    if isinstance(verdict, NotPcf):
        return EXIT_NOT_PCF
    return EXIT_UNDECIDED


def _enumeration_config(args) -> EnumerationConfig:
    config = load_config(args.config) if args.config else EnumerationConfig(degree=args.degree or 3)
    overrides = {}
    if args.degree is not None:
        overrides["degree"] = args.degree
    if args.n_arch is not None:
        overrides["n_arch"] = args.n_arch
    if args.precision is not None:
        overrides["precision"] = args.precision
    elif not args.config and os.environ.get(PRECISION_ENV):
        overrides["precision"] = default_precision()
    if args.primes is not None:
        overrides["primes"] = tuple(int(p) for p in args.primes.split(",") if p.strip())
    if args.strict:
        overrides["strict"] = True
    if args.workers is not None:
        overrides["workers"] = args.workers
    values = {**config.__dict__, **overrides}
    return EnumerationConfig(**values)


def cmd_enumerate(args, out) -> int:
    config = _enumeration_config(args)
    code = EXIT_OK
    try:
        result = enumerate_pcf_cubics(config) if config.degree == 3 else enumerate_pcf_quadratics(config)
    except StrictModeError as exc:
        result = exc.result
        code = EXIT_STRICT
    if args.output:
        run_dir = Path(args.output) / f"run-{config.digest()}"
        paths = result.write(run_dir)
        print(f"wrote {run_dir}", file=sys.stderr)
        del paths
    if args.format == "json":
        print(json.dumps(result.summary(), indent=2, sort_keys=True), file=out)
    elif args.format == "csv":
        out.write(result.csv_text())
    else:
        counts = result.stage_counts
        if config.degree == 3:
            chain = [counts["grid"], counts["after_arch"]]
            chain += [counts[f"after_padic{p}"] for p in config.primes]
            chain += [counts["final_with_twins"]]
            print(" -> ".join(str(n) for n in chain), file=out)
        else:
            print(f"{counts['grid']} -> {counts['pcf']}", file=out)
        print("final: " + ", ".join(result.final_strings()), file=out)
        if result.undecided:
            print(f"undecided: {len(result.undecided)}", file=out)
    return code


def cmd_family_scan(args, out) -> int:
    c_values = [Fraction(s) for s in args.c_list.split(",") if s.strip()]
    rows = family_scan(args.family, args.degree, c_values, _budget(args))
    text = family_csv(rows, exact=args.exact)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Treats -3/4, -z^2, -(1/2)*z and -sqrt(2) as values rather than flags."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-(\d|\.\d|\(|sqrt\(|[zx]($|[^a-zA-Z-]))")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="critheight", description="Canonical and critical heights of polynomials over Q.")
    sub = parser.add_subparsers(dest="command", required=True)

    def budget_flags(p):
        p.add_argument("--precision", type=int, default=None, help=f"working precision in bits (env {PRECISION_ENV})")
        p.add_argument("--iterations", type=int, default=64, help="iteration budget")

    h = sub.add_parser("height", help="canonical height of a point")
    h.add_argument("poly")
    h.add_argument("point")
    budget_flags(h)
    h.add_argument("--verbose", "-v", action="store_true", help="per-place breakdown")
    h.add_argument("--exact", action="store_true", help="print dyadic endpoints")
    h.add_argument("--format", choices=("text", "json"), default="text")
    h.set_defaults(func=cmd_height)

    c = sub.add_parser("certify", help="decide whether a polynomial is post-critically finite")
    c.add_argument("poly", nargs="?")
    c.add_argument("--cubic", nargs=2, metavar=("A", "B"), help="z^3 + A z + B")
    c.add_argument("--quadratic", metavar="c", help="z^2 + c")
    budget_flags(c)
    c.set_defaults(func=cmd_certify)

    e = sub.add_parser("enumerate", help="find all PCF quadratics or cubics over Q")
    e.add_argument("--degree", type=int, choices=(2, 3), default=None)
    e.add_argument("--n-arch", type=int, default=None, help="archimedean sieve depth (default 14)")
    e.add_argument("--precision", type=int, default=None)
    e.add_argument("--primes", default=None, help="comma-separated primes for p-adic sieves")
    e.add_argument("--strict", action="store_true", help="fail (exit 4) on undecided candidates")
    e.add_argument("--workers", type=int, default=None)
    e.add_argument("--format", choices=("text", "json", "csv"), default="text")
    e.add_argument("--output", help="directory receiving run-<digest>/")
    e.add_argument("--config", help="key = value config file")
    e.set_defaults(func=cmd_enumerate)

    f = sub.add_parser("family-scan", help="critical height ratios along a one-parameter family")
    f.add_argument("--family", choices=FAMILIES, required=True)
    f.add_argument("--degree", type=int, default=3)
    f.add_argument("--c-list", default="", help="comma-separated rationals")
    budget_flags(f)
    f.add_argument("--exact", action="store_true")
    f.add_argument("--output")
    f.set_defaults(func=cmd_family_scan)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc.pretty()}", file=sys.stderr)
    except (UsageError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
