import math
import random

import pytest
from hypothesis import given

from strategies import expressions
from trigproof.expr import UnfoldableConstant, build, canonicalize, eval_numeric
from trigproof.syntax import ParseError, parse, parse_slots, slots_text, to_text

CASE_0 = "2*sin(2*x)*sin(4*x + pi/4) - cos(2*x + pi/4) + cos(6*x + pi/4)"


def test_parse_three_terms_and_is_identity():
    e = parse(CASE_0)
    assert len(e) == 3
    rng = random.Random(5)
    for _ in range(20):
        assert abs(eval_numeric(e, rng.uniform(-10, 10))) < 1e-9


def test_print_examples():
    e = parse("sqrt(3)*sin(x)/2 - 2*sin(3*x)*sin(2*x + pi/3)")
    # factors inside a term are printed in canonical order
    assert to_text(e) == "sqrt(3)*sin(x)/2 - 2*sin(2*x + pi/3)*sin(3*x)"
    assert to_text(parse("cos(5*x - 2*pi/3)**2")) == "cos(5*x - 2*pi/3)**2"
    assert to_text(parse("0")) == "0"


def test_parse_keeps_written_order():
    e = parse("cos(x) + sin(x)")
    assert to_text(e) == "cos(x) + sin(x)"
    assert to_text(canonicalize(e)) == "sin(x) + cos(x)"


def test_parse_accepts_varied_spelling():
    a = parse("sin(pi/3 + 2*x)*2")
    b = parse("2*sin(2*x + pi/3)")
    assert a == b
    assert parse("sin(x + π/6)") == parse("sin(x + pi/6)")


def test_constant_folding_in_parser():
    e = parse("sin(pi/6)*cos(x) - cos(x)/2")
    assert e.is_zero


def test_padding():
    e = parse("sin(x) - cos(x)")
    assert to_text(e, pad_to=4) == "sin(x) - cos(x) + 0 + 0"
    assert parse(to_text(e, pad_to=8)) == e
    with pytest.raises(ValueError):
        to_text(e, pad_to=1)


@pytest.mark.parametrize("bad", ["sin(x", "sin(x) +", "x", "pi", "sin(x)/0", "sin(x**2)", "sin(x)/sin(x)",
                                 "tan(x)", "sin(0.5*x)", "sin(x)**-1", "sqrt(5)"])
def test_parse_errors(bad):
    with pytest.raises((ParseError, UnfoldableConstant)):
        parse(bad)


def test_unfoldable_phase_rejected():
    with pytest.raises(UnfoldableConstant):
        parse("sin(x + pi/90)")


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as exc:
        parse("sin(x) + $")
    assert exc.value.pos == 9


@given(expressions())
def test_round_trip(e):
    assert parse(to_text(e)) == e
    assert parse(to_text(e, pad_to=max(8, len(e)))) == e


def test_round_trip_surd_coefficients():
    e = parse("-(sqrt(2) + sqrt(6))*sin(x)/4 + (1 - sqrt(3))*cos(2*x)")
    assert parse(to_text(e)) == e
    assert math.isclose(eval_numeric(e, 0.0), 1 - math.sqrt(3), abs_tol=1e-12)


def test_parse_slots():
    e, slots = parse_slots("0 + sin(x) + 0 + 2*cos(x)")
    assert slots == [None, 0, None, 1]
    assert e == parse("sin(x) + 2*cos(x)")
    with pytest.raises(ParseError):
        parse_slots("sin(x) + sin(x)")
    with pytest.raises(ParseError):
        parse_slots("(sin(x) + cos(x))*2")


def test_slots_text():
    t = build([(1, [("sin", 1, 0)])]).terms[0]
    assert slots_text([None, t, None]) == "0 + sin(x) + 0"
