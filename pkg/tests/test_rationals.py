from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from anonlab.rationals import (
    as_fraction,
    calkin_wilf_index,
    calkin_wilf_rational,
    decode_rational,
    encode_rational,
    format_rational,
    parse_rational,
)

from conftest import rationals


def test_wire_format_roundtrip():
    assert parse_rational("3/1") == 3
    assert parse_rational(" -6/4 ") == Fraction(-3, 2)
    assert parse_rational("0.25") == Fraction(1, 4)
    assert format_rational(Fraction(-3, 2)) == "-3/2"
    assert format_rational(4) == "4/1"


@pytest.mark.parametrize("bad", ["", "1/", "1e3", "nan", "x/2"])
def test_malformed_rationals_rejected(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_floats_are_not_exact():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(TypeError):
        as_fraction(True)


def test_calkin_wilf_prefix():
    # breadth-first Calkin-Wilf order, written out by hand
    expected = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 2), (2, 3), (3, 1), (1, 4), (4, 3), (3, 5)]
    assert [calkin_wilf_rational(n) for n in range(1, 11)] == [Fraction(a, b) for a, b in expected]


def test_signed_encoding_prefix():
    assert [decode_rational(n) for n in range(6)] == [0, 1, -1, Fraction(1, 2), Fraction(-1, 2), 2]


def test_encoding_is_a_bijection_on_an_initial_segment():
    seen = {decode_rational(n) for n in range(2000)}
    assert len(seen) == 2000
    assert all(encode_rational(decode_rational(n)) == n for n in range(2000))


@given(rationals(max_den=50))
def test_encode_decode_roundtrip(q):
    assert decode_rational(encode_rational(q)) == q


@given(st.integers(1, 10**6))
def test_calkin_wilf_index_inverts(n):
    assert calkin_wilf_index(calkin_wilf_rational(n)) == n
