import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import expressions, surds, terms
from trigproof.expr import (
    COS,
    ONE,
    SIN,
    ZERO,
    SurdScalar,
    UnfoldableConstant,
    build,
    canonicalize,
    combine,
    eval_numeric,
    fold12,
    fold_constant,
    is_canonical,
    make_term,
    remove_common_factors,
    same_up_to_order,
    shuffle_terms,
    substitute_linear,
    subtract,
    term_value,
)

R2, R3, R6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)


# ---------------------------------------------------------------- scalars


def test_surd_basis_products():
    r2 = SurdScalar.make(0, 1, 0, 0)
    r3 = SurdScalar.make(0, 0, 1, 0)
    r6 = SurdScalar.make(0, 0, 0, 1)
    assert r2 * r2 == SurdScalar.rational(2)
    assert r3 * r3 == SurdScalar.rational(3)
    assert r6 * r6 == SurdScalar.rational(6)
    assert r2 * r3 == r6
    assert r2 * r6 == SurdScalar.make(0, 0, 2, 0)
    assert r3 * r6 == SurdScalar.make(0, 3, 0, 0)


def test_surd_normalizes():
    assert SurdScalar.make(2, 4, 0, 6, 4) == SurdScalar.make(1, 2, 0, 3, 2)
    assert SurdScalar.make(1, 0, 0, 0, -2) == SurdScalar.make(-1, 0, 0, 0, 2)
    assert SurdScalar.make(0, 0, 0, 0, 7) == ZERO
    assert not ZERO and ONE


@given(surds, surds)
def test_surd_arithmetic_matches_floats(a, b):
    assert math.isclose(float(a + b), float(a) + float(b), abs_tol=1e-9)
    assert math.isclose(float(a * b), float(a) * float(b), abs_tol=1e-9)
    assert math.isclose(float(a - b), float(a) - float(b), abs_tol=1e-9)


@given(surds, surds, surds)
def test_surd_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@given(surds)
def test_surd_zero_test_is_exact(a):
    # the basis 1, sqrt2, sqrt3, sqrt6 is linearly independent over Q
    assert a.is_zero() == (a == ZERO)
    if not a.is_zero():
        assert float(a) != 0.0


# ---------------------------------------------------------------- constants


@pytest.mark.parametrize("k", range(-30, 31))
def test_fold_tables_match_libm(k):
    assert math.isclose(float(fold12(SIN, k)), math.sin(k * math.pi / 12), abs_tol=1e-12)
    assert math.isclose(float(fold12(COS, k)), math.cos(k * math.pi / 12), abs_tol=1e-12)


def test_fold_constant_values():
    assert fold_constant("sin", Fraction(1, 6)) == SurdScalar.make(1, 0, 0, 0, 2)
    assert fold_constant("cos", Fraction(1, 4)) == SurdScalar.make(0, 1, 0, 0, 2)
    assert fold_constant("sin", Fraction(1, 12)) == SurdScalar.make(0, -1, 0, 1, 4)
    assert fold_constant(COS, Fraction(1)) == SurdScalar.rational(-1)


def test_unfoldable_phase():
    with pytest.raises(UnfoldableConstant):
        fold_constant("sin", Fraction(1, 90))


# ---------------------------------------------------------------- terms


def test_make_term_parity_and_merge():
    # sin(-2x + pi/3) = -sin(2x - pi/3); cos(-x) = cos(x)
    t = make_term(ONE, [(SIN, -2, 4, 1), (COS, -1, 0, 1), (COS, 1, 0, 1)])
    assert t.coef == SurdScalar.rational(-1)
    assert [(f.kind, f.x_coef, f.phase12, f.exponent) for f in t.factors] == [(SIN, 2, -4, 1), (COS, 1, 0, 2)]


def test_make_term_folds_constants_and_drops_zero():
    assert make_term(ONE, [(SIN, 0, 0, 1), (COS, 1, 0, 1)]) is None
    t = make_term(ONE, [(COS, 0, 4, 2), (SIN, 1, 0, 1)])  # cos(pi/3)^2 = 1/4
    assert t.coef == SurdScalar.make(1, 0, 0, 0, 4)


def test_phase_window():
    t = make_term(ONE, [(SIN, 1, 13, 1)])
    assert t.factors[0].phase12 == -11
    t = make_term(ONE, [(SIN, 1, -12, 1)])
    assert t.factors[0].phase12 == 12


@given(terms(), st.floats(-10, 10))
def test_term_numeric_consistency(t, x):
    raw = [(f.kind, f.x_coef, f.phase12, f.exponent) for f in t.factors]
    again = make_term(t.coef, raw)
    assert again == t
    direct = float(t.coef)
    for kind, xc, p, e in raw:
        arg = xc * x + p * math.pi / 12
        direct *= (math.sin(arg) if kind == SIN else math.cos(arg)) ** e
    assert math.isclose(term_value(t, x), direct, abs_tol=1e-9)


# ---------------------------------------------------------------- expressions


@given(expressions(sort=False))
def test_canonicalize_idempotent_and_value_preserving(e):
    c = canonicalize(e)
    assert canonicalize(c) == c
    assert is_canonical(c)
    for x in (-1.3, 0.4, 2.9):
        assert math.isclose(eval_numeric(c, x), eval_numeric(e, x), abs_tol=1e-9)


@given(expressions(), st.integers(0, 10_000))
def test_shuffle_is_a_permutation(e, seed):
    s, perm = shuffle_terms(e, random.Random(seed))
    assert sorted(perm) == list(range(len(e)))
    for old, new in enumerate(perm):
        assert s.terms[new] == e.terms[old]
    assert same_up_to_order(s, e)


def test_shuffle_single_term():
    e = build([(1, [("sin", 1, 0)])])
    s, perm = shuffle_terms(e, random.Random(3))
    assert s == e and perm == [0]


def test_angle_addition_value():
    e = build([(1, [("sin", 1, Fraction(1, 3))]), (Fraction(-1, 2), [("sin", 1, 0)]),
               (SurdScalar.make(0, 0, -1, 0, 2), [("cos", 1, 0)])])
    assert abs(eval_numeric(e, 0.3)) < 1e-12


def test_remove_common_factors():
    e = build([(2, [("sin", 1, 0, 2), ("cos", 2, 0)]), (3, [("sin", 1, 0), ("cos", 2, 0), ("cos", 3, 0)])])
    r = remove_common_factors(e)
    assert {tuple((f.kind, f.x_coef, f.exponent) for f in t.factors) for t in r.terms} == {
        ((SIN, 1, 1),), ((COS, 3, 1),)}


def test_subtract_self_is_zero():
    e = build([(1, [("sin", 1, 0)]), (2, [("cos", 3, Fraction(1, 4))])])
    assert subtract(e, e).is_zero


@given(expressions(min_terms=1), st.integers(1, 7), st.integers(-12, 12), st.floats(-3, 3))
@settings(max_examples=60)
def test_substitute_linear(e, a, b12, x):
    b = Fraction(b12, 12)
    s = substitute_linear(e, a, b)
    assert math.isclose(eval_numeric(s, x), eval_numeric(e, a * x + float(b) * math.pi),
                        abs_tol=1e-7 * (1 + sum(abs(float(t.coef)) for t in e.terms)))


def test_combine_merges_and_drops():
    t = make_term(ONE, [(SIN, 1, 0, 1)])
    assert combine([t, t._replace(coef=-t.coef)]).is_zero
    assert len(combine([t, t])) == 1
