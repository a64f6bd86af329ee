from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ripsmachine.errors import FieldMismatchError, ScalarParseError
from ripsmachine.scalar import Field, Scalar, parse_scalar, squarefree_part

Q = Field(0)
Q5 = Field(5)
Q2 = Field(2)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=60)


def sign_oracle(p: Fraction, q: Fraction, d: int) -> int:
    """Sign of p + q*sqrt(d) by bracketing sqrt(d*q^2) between integers scaled by a big power."""
    scale = 10 ** 40
    t = abs(q) * scale
    inner = t * t * d
    lo = math.isqrt(int(inner.numerator // inner.denominator))
    approx_lo = Fraction(lo, scale) if q >= 0 else -Fraction(lo + 1, scale)
    approx_hi = Fraction(lo + 1, scale) if q >= 0 else -Fraction(lo, scale)
    a, b = p + approx_lo, p + approx_hi
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # bracket straddles zero: decide exactly via p^2 = q^2 d
    return 0 if p * p == q * q * d and (p == 0 or (p > 0) != (q > 0)) else (1 if p > 0 else -1)


def test_rational_sum():
    assert Q.parse("1/2") + Q.parse("1/3") == Q.parse("5/6")
    assert (Q.parse("1/2") + Q.parse("1/3")).render() == "5/6"


def test_golden_product_is_one():
    x = Q5.parse("(1+sqrt(5))/2") * Q5.parse("(-1+sqrt(5))/2")
    assert x == 1
    assert x.render() == "1"


def test_sqrt2_below_three_halves():
    assert Q2.sqrt_d().compare(Q2.parse("3/2")) < 0


def test_render_parse_roundtrip_examples():
    for text in ["0", "-7/3", "sqrt(5)", "-sqrt(5)", "1/2-1/2*sqrt(5)", "3+2*sqrt(5)"]:
        x = Q5.parse(text)
        assert Q5.parse(x.render()) == x
    assert Q5.parse("sqrt(20)") == 2 * Q5.sqrt_d()
    assert Q5.parse("sqrt(9)") == 3


def test_unicode_minus_and_radical():
    assert Q5.parse("(−1+√5)/2") == Q5.parse("(-1+sqrt(5))/2")


@pytest.mark.parametrize("text", ["", "1/", "x", "1.5", "sqrt(x)", "2**3", "sqrt(5)(1)", "1/0"])
def test_malformed(text):
    with pytest.raises(ScalarParseError):
        Q5.parse(text)


def test_field_mismatch():
    with pytest.raises(FieldMismatchError):
        Q5.one + Q2.one
    with pytest.raises(FieldMismatchError):
        Q2.parse("sqrt(5)")
    with pytest.raises(FieldMismatchError):
        Q5.coerce(Q2.one)


def test_field_rejects_non_squarefree():
    with pytest.raises(ValueError):
        Field(8)
    assert squarefree_part(72) == (6, 2)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Q5.one / Q5.zero


@settings(max_examples=300, deadline=None)
@given(fractions, fractions, st.sampled_from([0, 2, 3, 5, 7]))
def test_sign_matches_oracle(p, q, d):
    x = Scalar(p, q, d)
    expect = sign_oracle(p, q if d > 1 else Fraction(0), d) if d > 1 else (p > 0) - (p < 0)
    assert x.sign() == expect


@settings(max_examples=200, deadline=None)
@given(fractions, fractions, fractions, fractions)
def test_field_axioms(a, b, c, e):
    x, y = Q5(a, b), Q5(c, e)
    assert x + y - y == x
    assert (x * y) == (y * x)
    if y:
        assert x / y * y == x
    assert (x - y).sign() == x.compare(y)
    assert parse_scalar(x.render(), 5) == x
    assert hash(x) == hash(Q5.parse(x.render()))


@settings(max_examples=100, deadline=None)
@given(fractions, fractions)
def test_norm_and_conjugate(a, b):
    x = Q5(a, b)
    assert x * x.conjugate() == Q5(x.norm())
