from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dlpet.exact import (
    IVec3, NonDivisibleError, as_rational, check_int64, cross, divide_exact, dot, floor,
    format_rational, frac, parse_rational, primitive,
)

small = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
coord = st.integers(min_value=-(2**29), max_value=2**29)
ivec = st.builds(IVec3, coord, coord, coord)


def test_floor_and_fraction_part():
    assert floor(Fraction(13, 10)) == 1
    assert floor(Fraction(-1, 3)) == -1
    x = 1 / (2 * Fraction(5, 13))
    assert x - floor(x) == Fraction(3, 10)
    assert frac(Fraction(-1, 3)) == Fraction(2, 3)


def test_normalization():
    assert as_rational("840/420") == 2
    assert format_rational(Fraction(840, 420)) == "2"
    assert format_rational(Fraction(-6, 4)) == "-3/2"


@given(small, small, small)
def test_associativity(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)


@given(small.filter(lambda v: v != 0))
def test_inverse(a):
    assert a * (1 / a) == 1


@given(small)
def test_string_round_trip(a):
    assert parse_rational(format_rational(a)) == a


def test_bad_rational_text():
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("abc")


def test_ivec_examples():
    assert cross(IVec3(1, 0, 0), IVec3(0, 1, 0)) == IVec3(0, 0, 1)
    assert divide_exact(IVec3(840, 0, 420), 420) == IVec3(2, 0, 1)
    assert dot(IVec3(1, 2, 3), IVec3(4, 5, 6)) == 32
    assert primitive(IVec3(4, -6, 8)) == IVec3(2, -3, 4)


def test_cross_guard():
    with pytest.raises(OverflowError):
        IVec3(2**31, 0, 0).cross(IVec3(0, 1, 0))


def test_int64_guard():
    with pytest.raises(OverflowError):
        check_int64(2**63)
    with pytest.raises(OverflowError):
        IVec3(2**63, 0, 0)


def test_divide_exact_rejects_remainder():
    with pytest.raises(NonDivisibleError):
        divide_exact(IVec3(841, 0, 420), 420)


@given(ivec, ivec)
def test_cross_is_orthogonal(u, v):
    w = cross(u, v)
    assert dot(w, u) == 0
    assert dot(w, v) == 0
