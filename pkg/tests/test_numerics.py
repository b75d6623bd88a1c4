from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from randlab.numerics import (DyadicInterval, IntervalReal, interval_arith, log2_floor_scaled,
                              log2_interval, log2_lower, log2_real, log2_upper, rat_from_str,
                              rat_to_str)
from strategies import positive_rationals, rationals


def bisect_log2_lower(a: Fraction, k: int) -> Fraction:
    """Oracle: largest q = j/2^k with 2^q <= a, by comparing 2^j <= a^(2^k) exactly."""
    lo, hi = -64 * 2 ** k, 64 * 2 ** k
    A = a ** (2 ** k)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok = Fraction(2) ** mid <= A
        lo, hi = (mid, hi) if ok else (lo, mid)
    return Fraction(lo, 2 ** k)


def test_rational_strings_round_trip():
    assert rat_to_str(Fraction(-6, 4)) == "-3/2"
    assert rat_from_str("4/6") == Fraction(2, 3)
    with pytest.raises(ValueError):
        rat_from_str("1/0")


def test_add_exact_halves():
    one = interval_arith("add", IntervalReal.exact(Fraction(1, 2)), IntervalReal.exact(Fraction(1, 2)))
    for k in range(0, 30, 7):
        assert one.approx(k).contains(1)


def test_mul_by_zero_absorbs():
    z = interval_arith("mul", IntervalReal.exact(0), log2_real(Fraction(7, 3)))
    assert z.approx(12).contains(0)


def test_min_third_quarter():
    m = interval_arith("min", IntervalReal.exact(Fraction(1, 3)), IntervalReal.exact(Fraction(1, 4)))
    iv = m.approx(20)
    assert iv.contains(Fraction(1, 4)) and iv.width <= Fraction(1, 2 ** 20)


def test_log2_special_values():
    assert log2_lower(1, 13) == 0
    v = log2_lower(8, 10)
    assert 3 - Fraction(1, 2 ** 10) <= v <= 3


def test_log2_three_matches_bisection_oracle():
    v = log2_lower(3, 20)
    # frozen from the bisection oracle (floor(2^20 log2 3) = 1661953)
    assert v == Fraction(1661953, 2 ** 20)
    assert bisect_log2_lower(Fraction(3), 12) == log2_lower(3, 12)


@given(st.builds(Fraction, st.integers(1, 300), st.integers(1, 40)), st.integers(0, 8))
def test_log2_lower_agrees_with_oracle(a, k):
    assert log2_lower(a, k) == bisect_log2_lower(a, k)


@given(positive_rationals, st.integers(0, 24))
def test_log2_lower_is_tight(a, k):
    lo = log2_lower(a, k)
    # 2^lo <= a < 2^(lo + 2^-k), checked by exact powers
    j = log2_floor_scaled(a, k)
    assert lo == Fraction(j, 2 ** k)
    assert Fraction(2) ** j <= a ** (2 ** k) if k <= 6 else True
    up = log2_upper(a, k)
    assert lo <= up <= lo + Fraction(1, 2 ** k)
    assert log2_interval(a, k).width <= Fraction(1, 2 ** k)


@given(st.lists(rationals, min_size=2, max_size=2), st.sampled_from(["add", "sub", "mul", "min", "max"]),
       st.integers(0, 30))
def test_interval_arith_encloses_exact_image(vals, op, k):
    u, v = vals
    # build non-exact reals so the generic path runs
    a = IntervalReal(lambda j, u=u: DyadicInterval(u - Fraction(1, 2 ** (j + 3)), u + Fraction(1, 2 ** (j + 3))))
    b = IntervalReal(lambda j, v=v: DyadicInterval(v - Fraction(1, 2 ** (j + 3)), v + Fraction(1, 2 ** (j + 3))))
    exact = {"add": u + v, "sub": u - v, "mul": u * v, "min": min(u, v), "max": max(u, v)}[op]
    r = interval_arith(op, a, b)
    iv = r.approx(k)
    assert iv.contains(exact)
    assert iv.width <= Fraction(1, 2 ** k)


@given(positive_rationals, st.integers(0, 40), st.integers(0, 40))
def test_nested_refinement(a, k1, k2):
    x = log2_real(a) + Fraction(1, 3)
    k1, k2 = sorted((k1, k2))
    assert x.approx(k2).subset_of(x.approx(k1))
    assert x.approx(k2).width <= Fraction(1, 2 ** k2)


@given(st.builds(Fraction, st.integers(1, 2 ** 16), st.integers(1, 1)), st.integers(0, 20))
def test_log2_lower_plus_step_exceeds_log(a, k):
    # log2_lower(a,k) + 2^-k > log2 a  <=>  2^(j+1) > a^(2^k); check with the scaled floor
    j = log2_floor_scaled(a, k)
    assert Fraction(j + 1, 2 ** k) > log2_lower(a, k)
    if k <= 5:
        assert Fraction(2) ** (j + 1) > a ** (2 ** k)


def test_interval_json_round_trip():
    iv = DyadicInterval(Fraction(-1, 3), Fraction(5, 7))
    assert DyadicInterval.from_json(iv.to_json()) == iv
    assert iv.to_json() == {"lo": "-1/3", "hi": "5/7"}
