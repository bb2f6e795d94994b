import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from anonlab.errors import ContractError, DomainError
from anonlab.homeo import Affine, Power, apply, identity, iterate
from anonlab.predictor import (
    AmalgamatedPredictor,
    LazyInvariantExtension,
    bad_set,
    build_amalgamated,
    embedding_violations,
    handle_request,
    interval_decomposition,
    invariant_extension,
    predict,
    predict_weak,
    promotion_check,
    verify_anonymity,
    verify_welldefined,
)
from anonlab.steps import (
    HoledFunction,
    PastFunction,
    StepFunction,
    is_invariant,
    precompose,
    restrict,
)
from anonlab.suites import PeriodicStep

from conftest import positive_rationals, rationals
from test_steps import pasts, steps

A, B, C = 0, 1, 2
affines = st.builds(Affine, positive_rationals(), rationals())


# ---------------------------------------------------------------- examples


def test_predict_examples():
    assert predict(PastFunction((), (A,), 17)) == A
    assert predict(PastFunction((0,), (A, B), 3)) == B
    assert predict(restrict(StepFunction((0,), (A, B)), 0)) == A


def test_weak_examples():
    assert predict_weak(HoledFunction(StepFunction.constant(A), 0)) == A
    assert predict_weak(HoledFunction(StepFunction((0,), (A, B)), 0)) == A
    assert predict_weak(HoledFunction(StepFunction((0,), (A, B)), 5)) == B


def test_anonymity_examples():
    assert verify_anonymity(PastFunction((), (A,), 2), Affine(3, 1)).status == "ok"
    assert verify_anonymity(PastFunction((0,), (A, B), 2), Affine(2, 0)).status == "ok"


def test_welldefined_examples():
    f = PastFunction((), (A,), 4)
    assert verify_welldefined(f, Affine(1, 1), Affine(1, 2)).status == "ok"
    g = PastFunction((0,), (A, B), 1)
    assert verify_welldefined(g, identity(), Affine(2, 0)).status == "ok"
    # a witness whose image is not extended is a skip, not a failure
    h = PastFunction((0, 1), (A, B, C), 2)
    res = verify_welldefined(h, identity(), Affine(Fraction(1, 2), 0))
    assert res.status == "skip" and res.ok


def test_bad_set_examples():
    assert bad_set(StepFunction.constant(A)).certified == ()
    bs = bad_set(StepFunction((0,), (A, B)))
    assert bs.certified == (0,) and len(bs.sampled_ok) > 0
    assert bad_set(StepFunction((0, 2), (A, B, C))).certified == (0, 2)
    assert bad_set(StepFunction((0, 2), (A, B, C))).to_json()["certified"] == ["0/1", "2/1"]


def test_handle_request():
    past = {"breakpoints": ["0/1"], "values": [0, 1], "cutoff": "3/1"}
    assert handle_request({"op": "predict", "past": past}) == {"state": 1}
    out = handle_request({"op": "badset", "total": {"breakpoints": ["0/1"], "values": [0, 1]},
                          "probes": ["1/2", "-1/1"]})
    assert out == {"certified": ["0/1"], "ok_probes": 2}


def test_invariant_extension_examples():
    f = PastFunction((0,), (A, B), 1)
    E = invariant_extension(f, Affine(2, 0))
    assert [E(y) for y in (Fraction(1, 2), 1, 3, 1000)] == [B, B, B, B]
    with pytest.raises(ContractError):
        invariant_extension(PastFunction((Fraction(1, 2),), (A, B), 1), Affine(1, Fraction(1, 4)))


def test_promotion_examples():
    samples = [Fraction(j, 4) for j in range(-20, 21)]
    assert promotion_check(StepFunction.constant(A), Affine(3, 1), Affine(1, 1), 0, samples).status == "ok"
    F = PeriodicStep((A, B, A, B), 2)
    assert promotion_check(F, Affine(1, 1), Affine(1, 2), 0, samples).status == "ok"
    broken = StepFunction((0,), (A, B))
    assert promotion_check(broken, Affine(1, 1), Affine(1, 1), 5, samples).status == "hypothesis-error"


def test_interval_decomposition_examples():
    assert interval_decomposition([0, 1], Fraction(1, 2)) == (0, 1)
    assert interval_decomposition([0, 1], -3) == (-math.inf, 0)
    assert interval_decomposition([], 7) == (-math.inf, math.inf)
    with pytest.raises(DomainError):
        interval_decomposition([0, 1], 1)


def test_amalgamation_examples():
    Q = build_amalgamated(Affine(2, 0), s0=C)
    assert isinstance(Q, AmalgamatedPredictor) and Q.decomposition.C == (0,)
    assert Q.predict(PastFunction((-1,), (A, B), 0)) == C
    with pytest.raises(ContractError):
        build_amalgamated(identity())
    # a map with no fixed points amalgamates over the whole line
    assert build_amalgamated(Affine(1, 1)).decomposition.C == ()


# ---------------------------------------------------------------- properties


@given(pasts(), affines)
def test_anonymity(f, phi):
    assert predict(f) == predict(precompose(f, phi))


@given(pasts(), st.data())
def test_weak_ignores_everything_above_the_hole(f, data):
    H = StepFunction.build(f.breakpoints, f.values)
    hole = f.cutoff
    extra = sorted(data.draw(st.sets(rationals(lo=0, hi=20), max_size=4)))
    extra = [hole + Fraction(1, 7) + x for x in extra]
    vals = data.draw(st.lists(st.integers(0, 2), min_size=len(extra) + 1, max_size=len(extra) + 1))
    # keep the value at the hole, change everything after it
    mutated = StepFunction.build(list(H.breakpoints) + [hole] + extra, list(H.values) + vals)
    assert predict_weak(HoledFunction(H, hole)) == predict_weak(HoledFunction(mutated, hole))


@given(steps())
def test_bad_set_within_breakpoints_and_monotone(H):
    bs = bad_set(H)
    assert set(bs.certified) <= set(H.breakpoints)
    assert embedding_violations(H, bs.certified) == []


@given(st.integers(1, 6), positive_rationals(), st.sampled_from([A, B]))
def test_lazy_extension_invariant_and_agrees(seed, t, default):
    phi = Affine(2, 0)
    f = PastFunction((0,), (A, B), t)
    E = invariant_extension(f, phi, default)
    probes = [Fraction(j, seed) for j in range(-30, 60)]
    for y in probes:
        assert E(apply(phi, y)) == E(y)
        if y < t:
            assert E(y) == f(y)


@given(positive_rationals(max_num=10))
def test_free_value_only_matters_off_reaching_orbits(y):
    # phi fixes 5; orbits starting at or above 5 never reach below the cutoff 1
    phi = Affine(2, -5)
    f = PastFunction((), (A,), 1)
    e0, e1 = LazyInvariantExtension(f, phi, 0), LazyInvariantExtension(f, phi, 1)
    reaches = y < 5
    assert (e0(y) == e1(y)) == reaches


@given(pasts(), st.sampled_from([-3, -2, -1, 1, 2, 3]))
def test_amalgamated_anonymous(f, k):
    Q = build_amalgamated(Affine(2, 0), s0=B)
    assume(f.cutoff != 0)
    assert Q.predict(f) == Q.predict(precompose(f, iterate(Affine(2, 0), k)))


@given(st.sets(positive_rationals(), min_size=1, max_size=4), st.lists(st.integers(0, 2), min_size=5, max_size=5))
def test_cyclic_tier_collapse(bps, vals):
    # on (0, inf) no step function with breakpoints inside is doubling-invariant
    bps = sorted(bps)
    F = StepFunction.build([0] + bps, [A] + vals[: len(bps) + 1])
    inner = [r for r in F.breakpoints if r > 0]
    assert is_invariant(F, Affine(2, 0)) == (not inner)


def test_cyclic_predictor_on_power_map():
    Q = build_amalgamated(Affine(Fraction(1, 3), 2), s0=A)  # fixes 3
    f = PastFunction((1, 2), (A, B, C), Fraction(5, 2))
    g = precompose(f, Affine(Fraction(1, 3), 2))
    assert Q.predict(f) == Q.predict(g) == C
    with pytest.raises(ContractError):
        build_amalgamated(Power(2))
