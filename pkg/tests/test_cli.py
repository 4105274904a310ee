import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critheight.cli import main
from critheight.numerics import QuadExt
from critheight.parsing import ParseError, parse_point, parse_polynomial
from critheight.polyforms import PolySpec


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


# -- grammar ----------------------------------------------------------------------


def test_polynomial_grammar():
    want = PolySpec((Fraction(1), Fraction(0), Fraction(-3), Fraction(1, 2)))
    assert parse_polynomial("z^3 - 3*z + 1/2") == want
    assert parse_polynomial("1,0,-3,1/2") == want
    assert parse_polynomial("3; 1/1, 0/1, -3/1, 1/2") == want
    assert parse_polynomial("z**3 + (-3)*z + (1/2)") == want
    assert parse_polynomial("-z^2 + 2 z") == PolySpec((Fraction(-1), Fraction(2), Fraction(0)))
    assert parse_polynomial("z^2 + z^2 - 1") == PolySpec((Fraction(2), Fraction(0), Fraction(-1)))


@pytest.mark.parametrize(
    "text,pos",
    [("z^3 + * 2", 6), ("z^3 +", 5), ("1,0,x/2", 4), ("z^2 $ 1", 4), ("1/0*z^2", 2), ("5", 0), ("z^2 - z^2 + 1", 0)],
)
def test_polynomial_errors_have_positions(text, pos):
    with pytest.raises(ParseError) as info:
        parse_polynomial(text)
    assert info.value.position == pos


def test_point_grammar():
    assert parse_point("3/4") == Fraction(3, 4)
    assert parse_point("-2") == Fraction(-2)
    assert parse_point("1+2*sqrt(3)") == QuadExt(1, 2, 3)
    assert parse_point("1/2 - sqrt(5)/2") == QuadExt(Fraction(1, 2), Fraction(-1, 2), 5)
    assert parse_point("sqrt(-1/2)") == QuadExt(0, 1, Fraction(-1, 2))
    assert parse_point("sqrt(4)") == Fraction(2)
    with pytest.raises(ParseError):
        parse_point("sqrt(2) + sqrt(3)")
    with pytest.raises(ParseError):
        parse_point("1 +")


coef = st.fractions(min_value=-50, max_value=50, max_denominator=20)


@settings(max_examples=200, derandomize=True)
@given(st.lists(coef, min_size=2, max_size=6).filter(lambda c: c[0] != 0))
def test_print_parse_round_trip(coeffs):
    F = PolySpec(tuple(coeffs))
    assert parse_polynomial(str(F)) == F
    assert parse_polynomial(F.to_text()) == F


@settings(max_examples=200, derandomize=True)
@given(coef, coef, st.sampled_from([2, 3, Fraction(5, 6), -1, Fraction(-1, 2)]))
def test_point_round_trip(x, y, D):
    z = QuadExt(x, y, D)
    parsed = parse_point(str(z))
    assert parsed == z


# -- commands ---------------------------------------------------------------------------


def test_height_command():
    code, out = run("height", "z^2", "2")
    assert code == 0 and out.startswith("0.69314718056 ±")
    code, out = run("height", "z^3 - 3*z", "1")
    assert code == 0 and out.strip() == "0 (preperiodic)"
    code, out = run("height", "z^2 + 1/4", "1/3", "--verbose")
    assert [line.split(":")[0].strip() for line in out.splitlines()[1:]] == ["inf", "2", "3"]
    code, out = run("height", "z^2", "2", "--exact")
    assert "*2^" in out
    code, out = run("height", "z^2", "2", "--format", "json")
    assert json.loads(out)["value"].startswith("0.693147")


def test_malformed_input_exits_2(capsys):
    code, _ = run("height", "z^3 + * 2", "1")
    assert code == 2
    assert "position 6" in capsys.readouterr().err
    assert run("height", "z", "1")[0] == 2
    assert run("bogus")[0] == 2


def test_certify_command():
    code, out = run("certify", "--cubic", "-3", "0")
    assert code == 0 and json.loads(out)["verdict"] == "Pcf"
    code, out = run("certify", "--cubic", "1", "1")
    assert code == 1 and "witness" in json.loads(out)
    code, out = run("certify", "--quadratic", "-2")
    rec = json.loads(out)
    assert code == 0 and rec["orbit"][0]["orbit"] == ["0", "-2", "2"]
    code, out = run("certify", "z^2 - 2", "--iterations", "1")
    assert code == 3
    assert run("certify")[0] == 2


def test_enumerate_command(tmp_path):
    code, out = run("enumerate", "--degree", "3")
    assert code == 0
    assert out.splitlines()[0] == "3895 -> 86 -> 15 -> 6 -> 7"
    code, out = run("enumerate", "--degree", "2", "--format", "json", "--output", str(tmp_path))
    summary = json.loads(out)
    assert summary["final"] == ["-2", "-1", "0"]
    run_dirs = list(tmp_path.iterdir())
    assert len(run_dirs) == 1 and run_dirs[0].name == f"run-{summary['config_digest']}"
    assert (run_dirs[0] / "results.csv").read_text().startswith("a,b,A,B,stage,verdict,witness,orbit_len")


def test_enumerate_strict_and_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("degree = 2\nmax_iterations = 1\n")
    assert run("enumerate", "--config", str(cfg))[0] == 0
    assert run("enumerate", "--config", str(cfg), "--strict")[0] == 4


def test_family_scan_command(tmp_path):
    code, out = run("family-scan", "--family", "unicritical", "--degree", "3", "--c-list", "10,1000,1000000")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4
    code, out = run("family-scan", "--family", "superattracting-zero", "--c-list", "")
    assert out == "family,d,c,h_c,h_crit,h_mc,ratio_mc,ratio_c\n"
    target = tmp_path / "scan.csv"
    run("family-scan", "--family", "unicritical", "--c-list", "7", "--output", str(target))
    assert target.read_text().count("\n") == 2


def test_precision_env(monkeypatch):
    monkeypatch.setenv("CRITHEIGHT_PRECISION", "256")
    _, out = run("height", "z^2", "3", "--exact")
    lo, hi = out.strip("[]\n").split(", ")
    assert int(lo.split("*2^")[1]) < -200
    monkeypatch.setenv("CRITHEIGHT_PRECISION", "abc")
    assert run("height", "z^2", "3")[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "critheight.cli", "certify", "--quadratic", "-1"], capture_output=True, text=True)
    assert proc.returncode == 0 and '"Pcf"' in proc.stdout


def test_negative_values_are_not_flags():
    code, out = run("certify", "--cubic", "-3/4", "3/4")
    assert code == 0 and json.loads(out)["orbit"][0]["orbit"] == ["1/2"]
    code, out = run("height", "-z^2", "-1/2", "-v")
    assert code == 0 and out.startswith("0.69314718056")
    code, out = run("family-scan", "--family", "unicritical", "--c-list", "-1,2")
    assert code == 0 and out.count("\n") == 3
    assert run("height", "z^2", "1", "-q")[0] == 2
