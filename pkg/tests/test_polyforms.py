import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from critheight.numerics import QuadExt
from critheight.polyforms import (
    AffineMap,
    CriticalPoint,
    Form,
    PolySpec,
    UnsupportedField,
    affine_conjugate,
    check_affine_height_bound,
    check_derivative_height_bounds,
    check_roots_height_bounds,
    coefficient_height,
    critical_points,
    critical_points_cubic,
    cubic,
    derivative,
    from_critical_points,
    g_forms,
    height_inequality_checks,
    monic_centred,
    monic_centred_height,
    poly_from_roots,
    quadratic,
    to_monic_centred,
)

from oracles import sym

Z = sympy.Symbol("z")

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
nonzero_small = small.filter(lambda q: q != 0)


def P(*coeffs):
    return PolySpec(tuple(Fraction(c) for c in coeffs))


def to_sympy(F: PolySpec):
    d = F.degree
    return sum(_sym_scalar(c) * Z ** (d - i) for i, c in enumerate(F.coeffs))


def _sym_scalar(c):
    if isinstance(c, QuadExt):
        return sym(c.x) + sym(c.y) * sympy.sqrt(sym(c.D))
    return sym(c)


def same_poly(F: PolySpec, expr) -> bool:
    return sympy.expand(to_sympy(F) - expr) == 0


# -- construction ---------------------------------------------------------------


def test_text_round_trip():
    F = P("1/3", 0, -1, "5/7")
    assert PolySpec.from_text(F.to_text()) == F
    with pytest.raises(ValueError):
        PolySpec.from_text("3; 1, 2")


def test_form_tags_are_validated():
    with pytest.raises(ValueError):
        PolySpec((Fraction(2), Fraction(0), Fraction(1)), Form.MONIC_CENTRED)
    with pytest.raises(ValueError):
        PolySpec((Fraction(0), Fraction(1)))


def test_from_critical_points_examples():
    assert from_critical_points([1, -1]) == P("1/3", 0, -1, 0)
    assert from_critical_points([0, 0]) == P("1/3", 0, 0, 0)
    c1 = Fraction(5, 3)
    assert from_critical_points([c1]) == P("1/2", -c1, 0)


@settings(max_examples=100, derandomize=True)
@given(st.lists(small, min_size=1, max_size=5))
def test_derivative_of_critical_form_is_product(c):
    f = from_critical_points(c)
    assert f(Fraction(0)) == 0
    assert f.leading == Fraction(1, len(c) + 1)
    assert derivative(f) == poly_from_roots(c)
    expr = sympy.integrate(sympy.prod([Z - sym(ci) for ci in c]), Z)
    assert same_poly(f, expr)


def test_g_forms_examples():
    assert g_forms([0, 0]) == [0, 0]
    assert g_forms([1, -1]) == [Fraction(-2, 3), Fraction(2, 3)]


@settings(max_examples=100, derandomize=True)
@given(st.lists(small, min_size=1, max_size=4), nonzero_small)
def test_g_forms_are_homogeneous(c, t):
    d = len(c) + 1
    scaled = g_forms([t * ci for ci in c])
    assert scaled == [t**d * g for g in g_forms(c)]


def test_g_forms_nontrivial_off_the_origin():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 4)
        c = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)]
        if all(ci == 0 for ci in c):
            continue
        assert any(g != 0 for g in g_forms(c))
    for n in range(1, 5):
        for value in (Fraction(1), Fraction(-7, 3)):
            assert any(g != 0 for g in g_forms([value] * n))


# -- affine conjugation ---------------------------------------------------------------


def test_affine_conjugate_examples():
    assert affine_conjugate(P(1, 0, 0), AffineMap(1, 1)) == P(1, 2, 0)
    F = P(3, -1, 2, 5)
    assert affine_conjugate(F, AffineMap.identity()) == F
    assert affine_conjugate(P(1, 0, 0, 0), AffineMap(2)) == P(4, 0, 0, 0)


@settings(max_examples=80, derandomize=True)
@given(st.lists(small, min_size=3, max_size=5).filter(lambda cs: cs[0] != 0), nonzero_small, small, nonzero_small, small)
def test_conjugation_is_a_group_action(coeffs, a1, g1, a2, g2):
    F = PolySpec(tuple(coeffs))
    psi, phi = AffineMap(a1, g1), AffineMap(a2, g2)
    assert affine_conjugate(affine_conjugate(F, psi), phi) == affine_conjugate(F, psi.then(phi))
    assert affine_conjugate(affine_conjugate(F, psi), psi.inverse()) == F
    # symbolic oracle for psi^-1 o F o psi
    expr = (to_sympy(F).subs(Z, sym(a1) * Z + sym(g1)) - sym(g1)) / sym(a1)
    assert same_poly(affine_conjugate(F, psi), expr)


def test_monic_centred_examples():
    F = P(1, 0, -3, 0)
    G, psi = to_monic_centred(F)
    assert G == F and psi == AffineMap.identity()

    # (1/3) z^3 - z: alpha^2 = 3, so alpha = sqrt(3) and G = z^3 - z
    G, psi = to_monic_centred(P("1/3", 0, -1, 0))
    assert psi.alpha == QuadExt(0, 1, 3)
    assert G == P(1, 0, -1, 0)
    a = sympy.sqrt(3)
    assert sympy.expand((to_sympy(P("1/3", 0, -1, 0)).subs(Z, a * Z)) / a - (Z**3 - Z)) == 0

    # z^2 + 2z + 1 centres at gamma = -1 to z^2 + 1
    G, psi = to_monic_centred(P(1, 2, 1))
    assert psi == AffineMap(1, -1)
    assert G == P(1, 0, 1)
    assert sympy.expand(to_sympy(P(1, 2, 1)).subs(Z, Z - 1) + 1 - (Z**2 + 1)) == 0


@settings(max_examples=80, derandomize=True)
@given(st.lists(small, min_size=3, max_size=4).filter(lambda cs: cs[0] != 0))
def test_monic_centred_conjugate_is_correct(coeffs):
    F = PolySpec(tuple(coeffs))
    try:
        G, psi = to_monic_centred(F)
    except UnsupportedField:
        assert F.degree == 4
        return
    assert G.leading == 1 and G.coeffs[1] == 0
    assert affine_conjugate(F, psi) == G


def test_unsupported_field():
    with pytest.raises(UnsupportedField):
        to_monic_centred(P(2, 0, 0, 0, 1))


def test_odd_degree_twist_preserves_h_mc():
    # z -> -z conjugation keeps monic centred forms monic exactly when d is odd
    rng = random.Random(2)
    for _ in range(50):
        lower = [Fraction(rng.randint(-30, 30), rng.randint(1, 8)) for _ in range(2)]
        F = monic_centred(*lower)
        T = affine_conjugate(F, AffineMap(-1))
        assert T == monic_centred(lower[0], -lower[1])
        assert monic_centred_height(F).intersects(monic_centred_height(T))
        lo, hi = monic_centred_height(F).exact_bounds(), monic_centred_height(T).exact_bounds()
        assert lo == hi
    # for even d the twist is not monic: its normal form is F again
    F = monic_centred(Fraction(3, 2))
    G, _ = to_monic_centred(affine_conjugate(F, AffineMap(-1)))
    assert G == F


# -- critical points ---------------------------------------------------------------------


def test_cubic_critical_point_examples():
    assert critical_points_cubic(-3, 0) == [CriticalPoint(Fraction(1)), CriticalPoint(Fraction(-1))]
    pts = critical_points_cubic(Fraction(3, 2), 0)
    assert [p.location for p in pts] == [QuadExt(0, 1, Fraction(-1, 2)), QuadExt(0, -1, Fraction(-1, 2))]
    assert critical_points_cubic(0, 5) == [CriticalPoint(Fraction(0), 2)]


@settings(max_examples=80, derandomize=True)
@given(st.lists(small, min_size=3, max_size=4).filter(lambda cs: cs[0] != 0))
def test_critical_points_are_roots_of_derivative(coeffs):
    F = PolySpec(tuple(coeffs))
    pts = critical_points(F)
    dF = derivative(F)
    if F.degree == 4:
        return
    assert sum(p.multiplicity for p in pts) == F.degree - 1
    for p in pts:
        assert dF(p.location) == 0


def test_rational_critical_points_in_higher_degree():
    F = from_critical_points([1, 2, 2])
    F = PolySpec(F.coeffs)  # drop the stored critical vector
    assert critical_points(F) == [CriticalPoint(Fraction(1)), CriticalPoint(Fraction(2), 2)]
    with pytest.raises(UnsupportedField):
        critical_points(P(1, 0, 0, 1, 0))


# -- heights of coefficients and the height inequalities ------------------------------


def test_coefficient_height_examples():
    assert monic_centred_height(cubic(-3, 0)).intersects(coefficient_height(P(3)))
    assert monic_centred_height(cubic(Fraction(-3, 4), Fraction(3, 4))).exact_bounds() == coefficient_height(P(4)).exact_bounds()
    c = Fraction(-7, 5)
    assert monic_centred_height(quadratic(c)).exact_bounds() == coefficient_height(P(7)).exact_bounds()


def test_inequality_examples():
    lower, upper = check_roots_height_bounds([0, 1])
    assert lower.holds and upper.holds and upper.lhs.is_zero()
    lower, upper = check_roots_height_bounds([2, 3])
    assert poly_from_roots([2, 3]) == P(1, -5, 6)
    assert lower.holds and upper.holds
    checks = check_derivative_height_bounds(P(1, 0, 1, 0))
    assert all(c.holds for c in checks)
    assert all(c.holds for c in height_inequality_checks(P(1, 0, 1, 0), AffineMap(2, 1), [2, 3]))


def test_roots_bound_with_conjugate_roots():
    r = QuadExt(0, 1, 2)
    lower, upper = check_roots_height_bounds([1 + r, 1 - r])
    assert lower.holds and upper.holds


def test_affine_bound_samples():
    rng = random.Random(17)
    for _ in range(100):
        d = rng.randint(2, 4)
        coeffs = [Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 6)) for _ in range(d + 1)]
        psi = AffineMap(Fraction(rng.randint(1, 9), rng.randint(1, 9)) * rng.choice([1, -1]), Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
        assert check_affine_height_bound(PolySpec(tuple(coeffs)), psi).holds


def test_derivative_bound_needs_zero_constant_term():
    with pytest.raises(ValueError):
        check_derivative_height_bounds(P(1, 0, 1))
