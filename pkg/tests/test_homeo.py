import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from anonlab.errors import ContractError, DomainError
from anonlab.homeo import (
    LOGIT,
    Affine,
    Lifted,
    Ordering,
    Power,
    PropagationError,
    Word,
    apply,
    archimedean_witness,
    commutator,
    compose,
    conjugate,
    element_from_json,
    element_to_json,
    fixed_point_propagation,
    fixed_points,
    format_element,
    holder_compare,
    identity,
    invert,
    is_identity,
    iterate,
    iterate_fixed_points_equal,
    parse_element,
    verify_free_action,
)

from conftest import positive_rationals, rationals

affines = st.builds(Affine, positive_rationals(), rationals())
shifts = st.builds(lambda b: Affine(1, b), rationals())
powers = st.builds(Power, positive_rationals(max_num=9, max_den=4))
unit_points = st.builds(Fraction, st.integers(1, 99), st.just(100))


# ---------------------------------------------------------------- examples


def test_apply_examples():
    assert apply(Affine(2, 0), 3) == 6
    assert apply(Power(2), Fraction(1, 2)) == Fraction(1, 4)
    assert apply(Word((Affine(2, 0), Affine(1, 1))), 0) == 2


def test_apply_outside_carrier():
    with pytest.raises(DomainError):
        apply(Power(2), Fraction(3, 2))


def test_compose_invert_examples():
    assert compose(Affine(2, 0), Affine(1, 1)) == Affine(2, 2)
    assert compose(Power(2), Power(3)) == Power(6)
    g = Affine(Fraction(3, 7), 5)
    assert compose(g, identity()) == g
    assert invert(Affine(2, 4)) == Affine(Fraction(1, 2), -2)
    assert invert(Power(3)) == Power(Fraction(1, 3))
    assert is_identity(invert(identity()))


def test_compose_rejects_mixed_carriers():
    with pytest.raises(DomainError):
        compose(Affine(2, 0), Power(2))


def _sympy_commutator(g: Affine, h: Affine):
    x = sympy.Symbol("x")
    lin = lambda e: (lambda t: sympy.Rational(e.a.numerator, e.a.denominator) * t
                     + sympy.Rational(e.b.numerator, e.b.denominator))
    inv = lambda e: (lambda t: (t - sympy.Rational(e.b.numerator, e.b.denominator))
                     / sympy.Rational(e.a.numerator, e.a.denominator))
    expr = sympy.expand(lin(g)(lin(h)(inv(g)(inv(h)(x)))))
    return sympy.Poly(expr, x).all_coeffs()


@pytest.mark.parametrize("g,h,expected", [
    (Affine(2, 0), Affine(1, 1), Affine(1, 1)),
    (Affine(3, 0), Affine(1, 2), Affine(1, 4)),
])
def test_commutator_examples(g, h, expected):
    assert commutator(g, h) == expected
    slope, offset = _sympy_commutator(g, h)
    assert (slope, offset) == (1, int(expected.b))
    assert is_identity(commutator(g, g))


def test_fixed_point_examples():
    assert fixed_points(Affine(2, 0)).points == (0,)
    assert fixed_points(Affine(1, 3)).kind == "none"
    rep = fixed_points(Affine(3, -2))
    assert rep.kind == "singleton" and rep.points == (1,)
    assert fixed_points(identity()).kind == "identity"


def test_holder_examples():
    assert holder_compare(Affine(1, 1), Affine(1, 2), 0) is Ordering.LESS
    assert holder_compare(Affine(5, 1), Affine(5, 1), 7) is Ordering.EQUAL
    assert holder_compare(Power(2), Power(3), Fraction(1, 2)) is Ordering.GREATER
    assert str(Ordering.LESS) == "Less"


def test_archimedean_examples():
    assert archimedean_witness(Affine(1, 1), Affine(1, 5), 0, 100) == 6
    assert archimedean_witness(Affine(1, 1), Affine(1, Fraction(1, 2)), 0, 100) == 1
    assert archimedean_witness(Affine(2, 0), Affine(16, 0), 1, 100) == 5
    assert archimedean_witness(Affine(1, 1), Affine(1, 500), 0, 10) is None
    with pytest.raises(ContractError):
        archimedean_witness(Affine(1, -1), Affine(1, 5), 0, 10)


def test_free_action_examples():
    assert verify_free_action([Affine(1, 1), Affine(1, 2)], [0, 5]) is None
    ce = verify_free_action([Affine(2, 0)], [0])
    assert ce.element == Affine(2, 0) and ce.point == 0
    assert verify_free_action([Power(2), Power(3)], [Fraction(1, 2), Fraction(1, 3)]) is None


def test_propagation_examples():
    assert fixed_point_propagation(identity(), Affine(1, 1), 0, 3) == [0, 1, 2, 3]
    # a map fixing every integer and commuting with the unit shift
    phi = Lifted(Power(2))
    pts = fixed_point_propagation(phi, Affine(1, 1), 0, 5)
    assert pts == [0, 1, 2, 3, 4, 5]
    assert all(apply(phi, p) == p for p in pts)
    with pytest.raises(PropagationError) as info:
        fixed_point_propagation(Affine(2, 0), Affine(3, 0), 0, 3)
    assert info.value.index == 2


def test_iterate_fixed_point_examples():
    assert iterate_fixed_points_equal(Affine(2, 0), 3, [0, 1]) is None
    assert iterate_fixed_points_equal(Affine(1, 1), 5, [0]) is None
    assert iterate_fixed_points_equal(identity(), 2, [0, Fraction(1, 3), 9]) is None


def test_conjugate_spot_check():
    assert is_identity(conjugate(identity(LOGIT.source), LOGIT))
    g = conjugate(Power(2), LOGIT)
    # logit((expit(0))^2) = logit(1/4)
    assert math.isclose(float(apply(g, 0)), math.log(1 / 3), abs_tol=1e-12)


def test_short_form_and_json_roundtrip():
    for text in ["affine:2,0", "affine:1/2,-3", "power:3/2", "lifted:2"]:
        g = parse_element(text)
        assert format_element(g) == text
        assert element_from_json(element_to_json(g)) == g
    w = Word((Affine(2, 0), Affine(1, 1)))
    assert parse_element(format_element(w)) == w
    with pytest.raises(DomainError):
        parse_element("affine:0,1")
    with pytest.raises(DomainError):
        parse_element("{broken")


# ---------------------------------------------------------------- properties


@given(affines, affines)
def test_affine_closure(g, h):
    c = compose(g, h)
    assert isinstance(c, Affine) and c.a > 0
    assert c.a == g.a * h.a and c.b == g.a * h.b + g.b
    assert compose(g, invert(g)) == identity()


@given(affines, affines)
def test_commutator_slope_is_one(g, h):
    assert commutator(g, h).a == 1


@given(shifts, shifts, st.lists(rationals(), min_size=10, max_size=10))
def test_holder_coherent_on_shifts(g, h, basepoints):
    assert len({holder_compare(g, h, x) for x in basepoints}) == 1


@given(powers, powers, st.lists(unit_points, min_size=10, max_size=10, unique=True))
def test_holder_coherent_on_powers(g, h, basepoints):
    assert len({holder_compare(g, h, x) for x in basepoints}) == 1


@given(shifts, shifts, shifts, rationals())
def test_holder_order_compatible_with_composition(f, g, h, x0):
    left = holder_compare(compose(f, g), compose(f, h), x0)
    assert left is holder_compare(g, h, x0)


@given(positive_rationals(), positive_rationals(), rationals())
def test_archimedean_bound(a, b, x0):
    assume(a < b)
    n = archimedean_witness(Affine(1, a), Affine(1, b), x0, 10_000)
    assert n is not None and n <= math.ceil(b / a) + 1


@given(shifts, shifts, rationals())
def test_shifts_commute(g, h, x):
    assert apply(compose(g, h), x) == apply(compose(h, g), x)


@given(powers, powers, unit_points)
def test_powers_commute(g, h, x):
    assert math.isclose(float(apply(compose(g, h), x)), float(apply(compose(h, g), x)), abs_tol=1e-12)


@given(affines, st.sampled_from([-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]))
def test_iterate_keeps_fixed_points(phi, n):
    assume(not is_identity(phi))
    assert fixed_points(iterate(phi, n)) == fixed_points(phi)
