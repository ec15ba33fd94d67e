import json
from fractions import Fraction

import pytest

from ramlab import breaks as B
from ramlab import constructions as C
from ramlab import heights as H
from ramlab.nottingham import CharTwoError


def test_h2_small():
    r = C.construct_h2(3, 3)
    assert r.upper.a == (1, 3, 9, 27) and r.lower.b == (1, 7, 61, 547)
    assert C.construct_h2(2, 3).lower.b == (1, 3, 11, 43)
    assert r.ok


@pytest.mark.parametrize("p", [2, 3, 5])
def test_h2_long(p):
    r = C.construct_h2(p, 30)
    assert r.ok and r.target_limit == Fraction(p, p + 1)


def test_h1_synthetic():
    r = C.construct_h1_synthetic(2, 2, 1, 40)
    assert r.ok
    v = H.ht1_detect(r.lower)
    assert v.consistent and v.h == 1
    assert C.construct_h1_synthetic(2, 2, 1, 2).ok
    with pytest.raises(C.ParameterError):
        C.construct_h1_synthetic(3, 2, 3, 10)


def test_hgt2_prefixes():
    r = C.construct_h_gt2(2, 3, 25)
    assert r.extra["n0"] == 1
    assert r.upper.a[:3] == (1, 3, 19) and r.lower.b[:4] == (1, 5, 69, 581)
    # 65 < 69 <= 73 at n = 2
    assert 73 - 8 < r.lower.b[2] <= 73
    assert C.construct_h_gt2(3, 3, 25).lower.b[:3] == (1, 10, 748)
    assert C.construct_h_gt2(2, Fraction(5, 2), 25).lower.b[:4] == (1, 5, 21, 213)


def test_hgt2_rejects_small_h():
    with pytest.raises(C.ParameterError):
        C.construct_h_gt2(2, 2, 5)


def test_hgt2_report_lists_every_check():
    names = [c.name for c in C.construct_h_gt2(3, 3, 25).checks]
    for expected in ("b_n lower bound (n > n0)", "b_n upper bound", "a_{n+1} > p a_n", "validate_upper", "admissible height"):
        assert expected in names


def test_ex_3not2():
    r = C.construct_ex_3not2(2, 40)
    assert r.ok
    assert r.upper.a[:3] == (1, 3, 7) and r.lower.b[:4] == (1, 5, 21, 85)
    assert all(abs(e) <= 1 for e in r.extra["eps"])


def test_ex_2not1():
    r = C.construct_ex_2not1(2, 30)
    assert r.ok and r.lower.b[:4] == (3, 19, 115, 755)
    assert r.target_limit == Fraction(8, 7)


def test_ex1():
    r = C.construct_ex1(3, 8)
    assert r.ok
    assert r.extra["c"][0] == 7
    assert r.extra["derived_heights"] == [Fraction(7), Fraction(7, 2)]
    assert [row["rank"] for row in r.extra["filtration"]] == [2, 1, 0]
    json.dumps(r.to_json())


def test_ex1_other_prime_and_char2():
    r = C.construct_ex1(5, 6)
    assert r.ok
    with pytest.raises(CharTwoError):
        C.construct_ex1(2, 5)


def test_short_data_reports_inconclusive_rather_than_failing():
    r = C.construct_ex1(3, 3)
    assert r.ok
    assert C.construct_h2(2, 2).ok


def test_failed_check_raises():
    r = C.ConstructionReport("demo", 2)
    r.check("always false", False, "witness")
    assert not r.ok and [c.name for c in r.failed()] == ["always false"]
    with pytest.raises(C.ConstructionError):
        C._finish(r)


def test_report_json_serializes_big_integers_as_strings():
    data = C.construct_h2(2, 40).to_json()
    text = json.dumps(data)
    assert str(2 ** 40) in text
    assert all(isinstance(x, str) for x in data["upper"]["values"])


def test_constructions_are_consistent_with_breaks_module():
    for r in (C.construct_h2(3, 10), C.construct_h_gt2(2, 3, 12), C.construct_ex_2not1(3, 10)):
        assert B.upper_to_lower(r.upper) == r.lower
        assert B.validate_upper(r.upper)
