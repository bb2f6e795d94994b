import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from anonlab.errors import DomainError
from anonlab.homeo import Affine, identity
from anonlab.steps import (
    HoledFunction,
    PastFunction,
    StepFunction,
    canonical_form,
    certify_minimality,
    classify_invariance,
    codes_below,
    decode_key,
    extends,
    holed_from_json,
    holed_to_json,
    is_invariant,
    least_extension,
    orbit_witness,
    past_from_json,
    precompose,
    restrict,
    step_from_json,
    step_to_json,
    wellorder_key,
    witness_from_tail,
)

from conftest import positive_rationals, rationals

A, B, C = 0, 1, 2


@st.composite
def steps(draw, max_k=5, states=3):
    bps = sorted(draw(st.sets(rationals(lo=-10, hi=10, max_den=6), max_size=max_k)))
    vals = draw(st.lists(st.integers(0, states - 1), min_size=len(bps) + 1, max_size=len(bps) + 1))
    return StepFunction.build(bps, vals)


@st.composite
def pasts(draw, max_k=5):
    F = draw(steps(max_k))
    top = F.breakpoints[-1] if F.breakpoints else Fraction(0)
    t = top + draw(positive_rationals(max_num=10, max_den=4))
    return restrict(F, t)


affines = st.builds(Affine, positive_rationals(), rationals())


# ---------------------------------------------------------------- examples


def test_restrict_examples():
    H = StepFunction((0,), (A, B))
    assert restrict(H, -1) == PastFunction((), (A,), -1)
    assert restrict(H, 3) == PastFunction((0,), (A, B), 3)
    H2 = StepFunction((0, 2), (A, B, C))
    assert restrict(H2, 2) == PastFunction((0,), (A, B), 2)


def test_precompose_examples():
    assert precompose(PastFunction((), (A,), 0), Affine(1, 1)) == PastFunction((), (A,), -1)
    f = PastFunction((0,), (A, B), 2)
    assert precompose(f, Affine(2, 0)) == PastFunction((0,), (A, B), 1)
    assert precompose(f, identity()) == f


def test_canonical_form_examples():
    cf = canonical_form(PastFunction((), (A,), 7))
    assert cf.normalized == PastFunction((), (A,), 0)
    assert cf.normalizer == Affine(1, 7)
    cf = canonical_form(PastFunction((3,), (A, B), 5))
    assert cf.normalized == PastFunction((0,), (A, B), 1)
    assert cf.normalizer == Affine(2, 3)


def test_classify_examples():
    assert classify_invariance(StepFunction.constant(A)) == 0
    assert classify_invariance(StepFunction((5,), (A, B))) == 1
    assert classify_invariance(StepFunction((0, 1), (A, B, A))) == 2
    # symbolic checks behind the tiers
    assert is_invariant(StepFunction.constant(A), Affine(1, 1))
    assert is_invariant(StepFunction((5,), (A, B)), Affine(2, -5))


def test_extends_examples():
    assert extends(StepFunction.constant(A), PastFunction((), (A,), 4))
    assert extends(StepFunction((0,), (A, B)), PastFunction((), (A,), 0))
    assert not extends(StepFunction.constant(A), PastFunction((), (B,), 1))


def test_least_extension_examples():
    assert least_extension(PastFunction((), (A,), 9)) == StepFunction.constant(A)
    assert least_extension(PastFunction((0,), (A, B), 2)) == StepFunction((0,), (A, B))
    F = least_extension(PastFunction((0, 1), (A, B, C), 2))
    assert F == StepFunction((0, 1), (A, B, C))
    assert wellorder_key(F).code == (2, 0, 1, 2, 0, 1)


def test_keys_of_examples():
    assert wellorder_key(StepFunction.constant(A)).code == (0, 0)
    assert wellorder_key(StepFunction((0,), (A, B))).code == (1, 0, 1, 0)


def test_malformed_inputs():
    with pytest.raises(DomainError):
        StepFunction((1, 0), (A, B, C))
    with pytest.raises(DomainError):
        PastFunction((3,), (A, B), 2)
    with pytest.raises(DomainError):
        PastFunction((), (A,), 0)(0)
    with pytest.raises(DomainError):
        HoledFunction(StepFunction.constant(A), 1)(1)


def test_json_roundtrip():
    f = PastFunction((Fraction(-1, 2), 3), (A, B, C), 4)
    assert past_from_json(step_to_json(f)) == f
    F = StepFunction((0, 2), (A, B, C))
    assert step_from_json(step_to_json(F)) == F
    g = HoledFunction(F, 1)
    assert holed_from_json(holed_to_json(g)) == g


def test_minimality_on_examples():
    for f in [PastFunction((), (A,), 3), PastFunction((0,), (A, B), 2),
              PastFunction((0, 1), (A, B, C), 2), PastFunction((0, 1, 3), (B, A, B, C), 5)]:
        assert certify_minimality(f, bound=4).ok
        assert certify_minimality(f, bound=3, pruned=False).ok


# ---------------------------------------------------------------- properties


@given(pasts(), affines)
def test_canonical_form_is_orbit_invariant(f, psi):
    assert canonical_form(precompose(f, psi)).normalized == canonical_form(f).normalized


@given(pasts(), affines)
def test_canonical_normalizer_witnesses(f, psi):
    cf = canonical_form(f)
    assert precompose(f, cf.normalizer) == cf.normalized


@given(pasts())
def test_extension_coherence(f):
    F = least_extension(f)
    phi = orbit_witness(F, f)
    assert phi is not None and extends(F, precompose(f, phi))
    other = witness_from_tail(F, f)
    assert other is not None and extends(F, precompose(f, other))


@given(pasts(max_k=4))
def test_minimality_certificate(f):
    assert certify_minimality(f, bound=3).ok


def test_keys_injective_and_totally_ordered():
    import random

    rng = random.Random(1)
    funcs = set()
    while len(funcs) < 1000:
        k = rng.randint(0, 5)
        bps = sorted({Fraction(rng.randint(-40, 40), rng.randint(1, 6)) for _ in range(k)})
        funcs.add(StepFunction.build(bps, [rng.randint(0, 2) for _ in range(len(bps) + 1)]))
    keys = {F: wellorder_key(F) for F in funcs}
    assert len(set(keys.values())) == len(funcs)
    ordered = sorted(keys.values())
    assert all(a < b for a, b in zip(ordered, ordered[1:]))
    for F, key in itertools.islice(keys.items(), 200):
        assert decode_key(key.code) == F


@given(steps(), steps(), steps())
def test_key_order_transitive_antisymmetric(F, G, H):
    a, b, c = wellorder_key(F), wellorder_key(G), wellorder_key(H)
    if a < b and b < c:
        assert a < c
    assert not (a < b and b < a)
    assert (a == b) == (F == G)


@given(steps(max_k=2))
def test_enumeration_below_a_key_is_finite(F):
    key = wellorder_key(F)
    below = list(codes_below(key, bound=3))
    assert all(wellorder_key(decode_key(c)) < key for c in below)
    assert len(below) == len(set(below))


@given(steps(), rationals())
def test_shift_invariance_iff_constant(F, c):
    if c != 0:
        assert is_invariant(F, Affine(1, c)) == (F.k == 0)


@given(steps(max_k=4), st.integers(0, 3), st.integers(0, 3))
def test_scaling_invariance_iff_at_most_one_breakpoint(F, i, j):
    if F.k == 1:
        r = F.breakpoints[0]
        assert is_invariant(F, Affine(3, -2 * r))
    if F.k >= 2 and i < F.k and j < F.k:
        # the only increasing affine maps permuting the breakpoints pin two of them
        r, s = F.breakpoints[0], F.breakpoints[1]
        ri, rj = F.breakpoints[i], F.breakpoints[min(j, F.k - 1)]
        if ri != rj and (rj - ri) / (s - r) > 0:
            slope = (rj - ri) / (s - r)
            phi = Affine(slope, ri - slope * r)
            assert is_invariant(F, phi) == (phi == identity())
