import csv
import io
import json
from fractions import Fraction

import pytest

from critheight.enumeration import (
    CSV_HEADER,
    FAMILY_HEADER,
    SUPERATTRACTING_ZERO,
    UNICRITICAL,
    EnumerationConfig,
    StrictModeError,
    classify_cubic,
    cubic_candidate_grid,
    enumerate_pcf_cubics,
    enumerate_pcf_quadratics,
    family_csv,
    family_member,
    family_scan,
    parse_config_text,
)
from critheight.pcf import replay_record
from critheight.polyforms import PolySpec

PAPER_LIST = sorted(
    [
        (Fraction(-3), Fraction(0)),
        (Fraction(-3, 2), Fraction(0)),
        (Fraction(-3, 4), Fraction(3, 4)),
        (Fraction(-3, 4), Fraction(-3, 4)),
        (Fraction(0), Fraction(0)),
        (Fraction(3, 2), Fraction(0)),
        (Fraction(3), Fraction(0)),
    ]
)


@pytest.fixture(scope="module")
def cubic_run():
    return enumerate_pcf_cubics()


def test_grid():
    grid = cubic_candidate_grid()
    assert len(grid) == 3895
    assert (-12, 0) in grid
    assert all(abs(a) <= 20 and 0 <= b <= 94 for a, b in grid)
    assert grid == sorted(grid)


def test_cubic_pipeline(cubic_run):
    assert cubic_run.final == PAPER_LIST
    counts = cubic_run.stage_counts
    assert counts["grid"] == 3895
    assert counts["after_arch"] == 86
    assert counts["undecided"] == 0
    assert counts["final_with_twins"] == 7


def test_partition_soundness(cubic_run):
    counts = cubic_run.stage_counts
    stages = ["integrality", "arch", "padic2", "padic3", "certify"]
    for stage in stages:
        assert counts[f"after_{stage}"] + sum(counts[f"eliminated_{s}"] for s in stages[: stages.index(stage) + 1]) == 3895


def test_every_elimination_replays(cubic_run):
    records = [json.loads(line) for line in cubic_run.jsonl_text().splitlines()]
    eliminated = [r for r in records if r["verdict"] == "NotPcf"]
    assert len(eliminated) == 3895 - 6
    assert all(replay_record(r) for r in eliminated)


def test_sign_twins_grid_wide(cubic_run):
    config = EnumerationConfig()
    for row in cubic_run.rows:
        if row.b == 0:
            continue
        twin = classify_cubic(row.a, -row.b, config)
        assert (twin.stage, twin.verdict) == (row.stage, row.verdict)


def test_twin_closure(cubic_run):
    final = set(cubic_run.final)
    assert final == {(A, -B) for A, B in final}


def test_determinism_across_worker_counts(cubic_run):
    parallel = enumerate_pcf_cubics(EnumerationConfig(workers=2))
    assert parallel.csv_text() == cubic_run.csv_text()
    assert parallel.jsonl_text() == cubic_run.jsonl_text()
    assert parallel.summary() == cubic_run.summary()


def test_weaker_sieve_same_endpoint():
    res = enumerate_pcf_cubics(EnumerationConfig(n_arch=5))
    assert res.stage_counts["after_arch"] > 86
    assert res.final == PAPER_LIST


def test_csv_layout(cubic_run):
    rows = list(csv.reader(io.StringIO(cubic_run.csv_text())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 3896
    survivors = [r for r in rows[1:] if r[5] == "Pcf"]
    assert [(r[2], r[3]) for r in survivors] == [("-3", "0"), ("-3/2", "0"), ("-3/4", "3/4"), ("0", "0"), ("3/2", "0"), ("3", "0")]


def test_write_outputs(cubic_run, tmp_path):
    paths = cubic_run.write(tmp_path / "run")
    summary = json.loads(paths["summary"].read_text())
    assert summary["stage_counts"]["after_arch"] == 86
    assert summary["config_digest"] == EnumerationConfig().digest()
    assert paths["csv"].read_text() == cubic_run.csv_text()


def test_strict_mode_raises_on_undecided():
    # one iteration is not enough to close any orbit
    with pytest.raises(StrictModeError) as info:
        enumerate_pcf_quadratics(EnumerationConfig(degree=2, strict=True, max_iterations=1))
    assert info.value.result.undecided


def test_quadratics():
    res = enumerate_pcf_quadratics()
    assert res.final == [-2, -1, 0]
    witness = {r.a: r.witness for r in res.rows}
    assert witness[1].startswith("inf:")
    orbit_len = {r.a: r.orbit_len for r in res.rows}
    assert orbit_len[-1] == 2 and orbit_len[-2] == 3


def test_config_file():
    cfg = parse_config_text("# run\nn_arch = 10\nprimes = 2, 3, 5\nstrict = yes\nprecision=256\n")
    assert cfg.n_arch == 10 and cfg.primes == (2, 3, 5) and cfg.strict and cfg.precision == 256
    with pytest.raises(ValueError):
        parse_config_text("bogus = 1")
    with pytest.raises(ValueError):
        parse_config_text("n_arch 3")
    assert cfg.digest() != EnumerationConfig().digest()
    assert EnumerationConfig(workers=3).digest() == EnumerationConfig().digest()


def test_family_members():
    assert family_member(UNICRITICAL, 3, 5) == PolySpec((Fraction(1), Fraction(0), Fraction(0), Fraction(5)))
    F = family_member(SUPERATTRACTING_ZERO, 3, 2)
    assert F == PolySpec((Fraction(1), Fraction(-3), Fraction(0), Fraction(0)))
    with pytest.raises(ValueError):
        family_member("lattes", 3, 1)


def test_family_scan_ratios():
    cs = [10**2, 10**4, 10**6]
    uni = family_scan(UNICRITICAL, 3, cs)
    sup = family_scan(SUPERATTRACTING_ZERO, 3, cs)
    assert uni[-1].ratio_c.gt(Fraction(6, 10)) and uni[-1].ratio_c.gt(Fraction(73, 100)) is False
    gaps_sup = [abs(r.ratio_mc.midpoint() - Fraction(1, 3).__float__()) for r in sup]
    assert gaps_sup == sorted(gaps_sup, reverse=True)
    assert abs(sup[-1].ratio_mc.midpoint() - 1 / 3) < 0.05


def test_family_scan_zero_and_empty():
    rows = family_scan(UNICRITICAL, 3, [0])
    assert rows[0].h_crit.is_zero() and rows[0].ratio_mc is None
    assert family_csv([]) == ",".join(FAMILY_HEADER) + "\n"
    assert "undefined" in family_csv(rows)
