from fractions import Fraction

import pytest
from conftest import ladder
from hypothesis import given
from hypothesis import strategies as st

from nashcap.numerics import (
    INF,
    PowerOfR,
    as_rat,
    ceil_log,
    floor_log,
    floor_log_ratio,
    geometric_mean,
    is_power_of,
    next_power_up,
    power_exponent,
    rat_from_json,
    rat_root_ratio,
    rat_to_json,
)

R = Fraction(5, 4)
R100 = Fraction(101, 100)

rats = st.fractions(min_value=Fraction(1, 10 ** 6), max_value=10 ** 6)
bases = st.sampled_from([Fraction(101, 100), Fraction(11, 10), Fraction(5, 4), Fraction(3, 2), Fraction(2)])


def test_power_up_of_one_is_r_to_zero():
    p = next_power_up(1, R)
    assert p.exponent == 0 and p.value == 1


def test_power_up_of_three_quarter_base():
    p = next_power_up(3, R)
    assert p.exponent == 5 == ladder(3, R)
    assert p.value == Fraction(3125, 1024)


def test_power_up_of_twice_r_squared():
    assert next_power_up(2 * R100 ** 2, R100).exponent == 72 == ladder(2 * R100 ** 2, R100)


def test_floor_log_ratio_values():
    assert floor_log_ratio(1, R) == 1
    assert floor_log_ratio(Fraction(5, 2), R100) == 93
    assert R100 ** 92 <= Fraction(5, 2) < R100 ** 93
    assert floor_log_ratio(Fraction(3125, 1024), R) == 6


@given(rats, bases)
def test_next_power_up_is_tight(u, r):
    t = next_power_up(u, r).exponent
    assert r ** t >= u > r ** (t - 1)
    assert ceil_log(u, r) == t


@given(rats, bases)
def test_floor_log_is_tight(q, r):
    t = floor_log(q, r)
    assert r ** t <= q < r ** (t + 1)


@given(st.integers(-60, 60), bases)
def test_exact_powers_round_trip(t, r):
    assert next_power_up(r ** t, r).exponent == t
    assert power_exponent(r ** t, r) == t
    assert is_power_of(r ** t, r)
    # strictly between two consecutive powers
    assert not is_power_of(r ** t * (1 + r) / 2, r)


def test_power_arithmetic():
    a, b = PowerOfR(3, R), PowerOfR(5, R)
    assert (a * b).exponent == 8 and (b / a).value == R ** 2
    with pytest.raises(ValueError):
        a * PowerOfR(1, R100)


def test_bad_arguments():
    with pytest.raises(ValueError):
        next_power_up(0, R)
    with pytest.raises(ValueError):
        next_power_up(1, 1)
    with pytest.raises(TypeError):
        as_rat(0.25)
    with pytest.raises(ValueError):
        floor_log(-1, R)


def test_json_round_trip():
    for q in [Fraction(0), Fraction(7, 3), Fraction(10 ** 40, 3)]:
        assert rat_from_json(rat_to_json(q)) == q
    j = rat_to_json(INF)
    assert j["den"] == "0" and j["approx"] is None
    assert rat_from_json(j) == INF
    assert rat_to_json(Fraction(1, 4))["approx"] == 0.25


def test_float_mirrors_survive_huge_values():
    big = Fraction(10 ** 400)
    assert geometric_mean(big, 100) == pytest.approx(10 ** 4)
    assert rat_root_ratio(big * 8, big, 3) == pytest.approx(2)
    assert geometric_mean(Fraction(0), 3) == 0.0
    assert rat_root_ratio(Fraction(1), Fraction(0), 2) == INF
