from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramlab.constructions import ex1_alpha
from ramlab.exactmath import (
    CertifiedReal,
    RefinementCapError,
    certified_ceil,
    certified_compare,
    certified_floor,
    iroot,
    parse_rational,
    pow_rational,
    precision_cap,
    rational_str,
    to_fraction,
)


def test_pow_rational_integer_and_zero_exponents_are_exact():
    assert pow_rational(2, 3).exact == 8
    assert pow_rational(2, Fraction(0)).exact == 1
    assert pow_rational(4, Fraction(3, 2)).exact == 8


def test_pow_rational_three_to_five_halves():
    x = pow_rational(3, Fraction(5, 2))
    assert x.exact is None
    lo, hi = x.interval(64)
    # 15.5884^2 < 3^5 < 15.5885^2
    assert Fraction(155884, 10 ** 4) < lo and hi < Fraction(155885, 10 ** 4)
    assert lo ** 2 <= 243 <= hi ** 2


def test_negative_exponent():
    lo, hi = pow_rational(2, Fraction(-1, 2)).enclose(Fraction(1, 10 ** 12))
    assert lo * lo <= Fraction(1, 2) <= hi * hi


def test_enclose_width():
    lo, hi = pow_rational(5, Fraction(1, 3)).enclose(Fraction(1, 10 ** 30))
    assert hi - lo < Fraction(1, 10 ** 30)
    assert lo ** 3 <= 5 <= hi ** 3


def test_alpha_floors():
    alpha = ex1_alpha(3)
    assert certified_floor(alpha) == 5
    assert certified_floor(81 * alpha) == 471
    assert abs(alpha.approx() - 5.8226) < 1e-3


def test_alpha_bounds():
    alpha = ex1_alpha(3)
    assert certified_compare(pow_rational(3, Fraction(3, 2)), alpha) == -1
    assert certified_compare(alpha, 9) == -1


def test_compare_exact():
    assert certified_compare(7, 7) == 0
    assert certified_compare(Fraction(1, 3), Fraction(1, 2)) == -1
    assert certified_compare(CertifiedReal.from_rational(2), 1) == 1


def test_floor_symbolically_exact():
    three = pow_rational(9, Fraction(1, 2))
    assert three.exact == 3
    assert certified_floor(three) == 3
    assert certified_ceil(three) == 3
    assert certified_floor(Fraction(-7, 2)) == -4


def test_ceil_irrational():
    assert certified_ceil(pow_rational(2, Fraction(1, 2))) == 2


def test_cap_reached_on_hidden_equality(monkeypatch):
    monkeypatch.setenv("RAMLAB_PRECISION_CAP", "256")
    assert precision_cap() == 256
    root2 = pow_rational(2, Fraction(1, 2))
    with pytest.raises(RefinementCapError):
        certified_compare(root2 * root2, 2)
    with pytest.raises(RefinementCapError):
        certified_floor(root2 * root2)


def test_bad_cap(monkeypatch):
    monkeypatch.setenv("RAMLAB_PRECISION_CAP", "8")
    with pytest.raises(ValueError):
        precision_cap()


def test_division_by_exact_zero():
    with pytest.raises(ZeroDivisionError):
        CertifiedReal.from_rational(1) / 0


def test_to_fraction_rejects_floats():
    with pytest.raises(TypeError):
        to_fraction(0.5)
    assert to_fraction("3/4") == Fraction(3, 4)


def test_rational_text_roundtrip():
    assert rational_str(Fraction(7, 2)) == "7/2"
    assert rational_str(Fraction(6, 3)) == "2"
    assert parse_rational("7/2") == Fraction(7, 2)
    assert parse_rational(" -3 ") == -3


def test_iroot():
    assert iroot(10 ** 40, 2) == 10 ** 20
    assert iroot(10 ** 40 - 1, 2) == 10 ** 20 - 1
    assert iroot(26, 3) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 50), st.integers(-20, 20), st.integers(1, 6))
def test_pow_rational_encloses(p, u, v):
    e = Fraction(u, v)
    lo, hi = pow_rational(p, e).interval(96)
    assert lo <= hi
    # compare against exact integer powers: lo^v <= p^u <= hi^v
    target = Fraction(p) ** e.numerator
    assert lo ** e.denominator <= target <= hi ** e.denominator


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10 ** 12))
def test_floor_of_square_root_matches_iroot(n):
    assert certified_floor(pow_rational(n, Fraction(1, 2))) == iroot(n, 2)


@settings(max_examples=60, deadline=None)
@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_arithmetic_stays_exact(x, y):
    cx, cy = CertifiedReal.from_rational(x), CertifiedReal.from_rational(y)
    assert (cx + cy).exact == x + y
    assert (cx * cy).exact == x * y
    assert certified_compare(cx, cy) == (x > y) - (x < y)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(1, 9))
def test_interval_arithmetic_encloses(p, k):
    r = pow_rational(p, Fraction(1, 2))
    lo, hi = (r * k + r / 3 - 1).interval(128)
    true_lo, true_hi = r.interval(256)
    assert lo <= true_lo * k + true_lo / 3 - 1 + Fraction(1, 2 ** 120)
    assert hi >= true_hi * k + true_hi / 3 - 1 - Fraction(1, 2 ** 120)
