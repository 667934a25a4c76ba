from __future__ import annotations

from fractions import Fraction

from hypothesis import given, strategies as st

from dspec.asymptotics import INF, Series

J = Series.index()


def test_limits():
    assert (J * 2 + 1).limit() == INF
    assert (Series.power(1, -1) + 3).limit() == 3
    assert Series.power(-2, Fraction(1, 2)).limit() == -INF
    assert Series.power(5, -2).limit() == 0


def test_shift_of_polynomial_is_exact():
    s = (J * J).shift(-1)
    assert s.rem is None
    assert s(5) == 16.0


def test_shift_of_negative_power_carries_remainder():
    s = Series.power(1, -1).shift(-1)
    assert s.rem is not None
    assert abs(s(1000.0) - 1 / 999) < 1e-12


def test_reciprocal_of_linear():
    r = (J + 1).reciprocal()
    assert r.leading() == (Fraction(-1), Fraction(1))
    # retained terms are accurate up to the O(j^-5) remainder
    assert abs(r(200.0) - 1 / 201) <= 2 * 200.0 ** -5


def test_round_trip_json():
    s = J * 3 - Series.power(Fraction(1, 2), Fraction(-1, 2))
    assert Series([(e, c) for c, e in s.to_json()]).terms == s.terms


@given(st.fractions(min_value=-5, max_value=5), st.fractions(min_value=-5, max_value=5),
       st.integers(min_value=1, max_value=50))
def test_linear_algebra_matches_evaluation(a, b, j):
    s = J * a + b
    assert abs((s * s)(j) - float((a * j + b) ** 2)) <= 1e-9 * (1 + float((a * j + b) ** 2))
