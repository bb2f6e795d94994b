"""Anonymous predictors on the step universe and their verifiers.

:func:`predict` evaluates the key-least total extension of the orbit of a
past at the image of the cutoff under a witnessing affine map.  The
verifiers turn the defining properties (anonymity, independence from the
witness, a small bad set, the weak predictor, promotion of past invariance)
into checks that return a :class:`CheckResult` instead of raising.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ContractError, DomainError, OrbitCapError
from .homeo import (
    REAL,
    GroupElement,
    apply,
    close,
    element_to_json,
    fixed_points,
    invert,
    iterate,
)
from .rationals import format_rational, parse_rational
from .steps import (
    HoledFunction,
    PastFunction,
    StepFunction,
    extends,
    holed_from_json,
    least_extension,
    orbit_witness,
    past_from_json,
    precompose,
    restrict,
    step_from_json,
    step_to_json,
    wellorder_key,
)

ORBIT_CAP = 10**6
PROBES_PER_SEGMENT = 64


@dataclass
class CheckResult:
    """Outcome of a verifier.

    ``status`` is ``ok``, ``mismatch``, ``counterexample``, ``skip`` or
    ``hypothesis-error``; ``detail`` is a JSON-ready reproduction payload.
    """

    status: str
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in ("ok", "skip")


# --------------------------------------------------------------------------
# the predictor


def predict(f: PastFunction) -> int:
    F = least_extension(f)
    phi = orbit_witness(F, f)
    return F(precompose(f, phi).cutoff)


def predict_weak(g: HoledFunction) -> int:
    """Predict the value at the hole from the data to its left only."""
    return predict(restrict(g.body, g.hole))


def verify_anonymity(f: PastFunction, phi: GroupElement) -> CheckResult:
    moved = precompose(f, phi)
    a, b = predict(f), predict(moved)
    if a == b:
        return CheckResult("ok")
    return CheckResult(
        "mismatch",
        {"past": step_to_json(f), "phi": element_to_json(phi), "predict": a, "predict_moved": b},
    )


def verify_welldefined(f: PastFunction, phi1: GroupElement, phi2: GroupElement) -> CheckResult:
    """Evaluate the least extension at the cutoff images of two witnesses."""
    F = least_extension(f)
    g1, g2 = precompose(f, phi1), precompose(f, phi2)
    payload = {"past": step_to_json(f), "phi1": element_to_json(phi1), "phi2": element_to_json(phi2)}
    if not (extends(F, g1) and extends(F, g2)):
        return CheckResult("skip", payload)
    a, b = F(g1.cutoff), F(g2.cutoff)
    if a == b:
        return CheckResult("ok")
    payload.update(value1=a, value2=b)
    return CheckResult("mismatch", payload)


# --------------------------------------------------------------------------
# bad sets


@dataclass(frozen=True)
class BadSet:
    certified: tuple
    sampled_ok: tuple

    def to_json(self) -> dict:
        return {"certified": [format_rational(t) for t in self.certified], "ok_probes": len(self.sampled_ok)}


def default_probes(H: StepFunction, per_segment: int = PROBES_PER_SEGMENT) -> list[Fraction]:
    r = H.breakpoints
    if not r:
        return [Fraction(j - per_segment // 2, 8) for j in range(per_segment)]
    probes = [r[0] - Fraction(j, 8) for j in range(per_segment, 0, -1)]
    for lo, hi in zip(r, r[1:]):
        probes += [lo + (hi - lo) * Fraction(j, per_segment + 1) for j in range(1, per_segment + 1)]
    probes += [r[-1] + Fraction(j, 8) for j in range(1, per_segment + 1)]
    return probes


def bad_set(H: StepFunction, probes: Iterable | None = None) -> BadSet:
    """Where ``predict(H|(-inf, t)) != H(t)``: exact at every breakpoint and probe."""
    probes = set(default_probes(H) if probes is None else (Fraction(p) for p in probes))
    bad, good = [], []
    for t in sorted(set(H.breakpoints) | probes):
        if predict(restrict(H, t)) != H(t):
            bad.append(t)
        elif t in probes:
            good.append(t)
    return BadSet(tuple(bad), tuple(good))


def embedding_violations(H: StepFunction, certified: Sequence[Fraction]) -> list[tuple]:
    """Pairs ``s < t`` of bad points whose least extensions are not key-increasing."""
    keys = [(t, wellorder_key(least_extension(restrict(H, t)))) for t in sorted(certified)]
    out = []
    for i, (s, ks) in enumerate(keys):
        for t, kt in keys[i + 1:]:
            if not ks < kt:
                out.append((s, t))
    return out


# --------------------------------------------------------------------------
# invariant extensions and promotion


@dataclass(frozen=True)
class LazyInvariantExtension:
    """The ``phi``-invariant total extension of a ``phi``-invariant past.

    A point takes the past's value at the first point of its ``phi``-orbit
    below the cutoff, and ``default`` when the orbit never gets there.
    """

    past: PastFunction
    phi: GroupElement
    default: int = 0

    def __call__(self, y):
        t = self.past.cutoff
        if y < t:
            return self.past(y)
        fy = apply(self.phi, y)
        if close(fy, y):
            return self.default
        step = self.phi if fy < y else invert(self.phi)
        # the descending orbit converges to the largest fixed point below y
        report = fixed_points(self.phi)
        if report.kind in ("singleton", "finite"):
            below = [p for p in report.points if p < y]
            if below and max(below) >= t:
                return self.default
        x = y
        for _ in range(ORBIT_CAP):
            x = apply(step, x)
            if x < t:
                return self.past(x)
        raise OrbitCapError(f"orbit of {y} did not reach below {t} in {ORBIT_CAP} steps")


def _invariance_points(f: PastFunction, phi: GroupElement) -> list:
    t = f.cutoff
    base = list(f.breakpoints)
    edges = [t - 1] + base + [t]
    base += [(lo + hi) / 2 for lo, hi in zip(edges, edges[1:])] + [t - 1, t - 2]
    pts = set()
    for x in base:
        pts.add(x)
        for g in (phi, invert(phi)):
            try:
                pts.add(apply(g, x))
            except DomainError:
                pass
    return sorted(p for p in pts if p < t)


def invariant_extension(f: PastFunction, phi: GroupElement, default: int = 0) -> LazyInvariantExtension:
    """Check that ``f`` is ``phi``-invariant before its cutoff and extend it."""
    t = f.cutoff
    for x in _invariance_points(f, phi):
        y = apply(phi, x)
        if y < t and f(y) != f(x):
            raise ContractError(f"past is not phi-invariant at {x}: f({x})={f(x)}, f(phi(x))={f(y)}")
    return LazyInvariantExtension(f, phi, default)


def promotion_check(
    F: Callable, phi: GroupElement, psi: GroupElement, t, samples: Iterable
) -> CheckResult:
    """Past ``phi``-invariance plus full ``psi``-invariance should give full
    ``phi``-invariance when ``phi`` and ``psi`` lie in a freely acting group."""
    samples = list(samples)
    for x in samples:
        if F(apply(psi, x)) != F(x):
            return CheckResult("hypothesis-error", {"reason": "not psi-invariant", "x": str(x)})
    for x in samples:
        if x < t and F(apply(phi, x)) != F(x):
            return CheckResult("hypothesis-error", {"reason": "not phi-invariant before t", "x": str(x)})
    for x in samples:
        if not x < t and F(apply(phi, x)) != F(x):
            return CheckResult("counterexample", {"x": str(x)})
    return CheckResult("ok")


# --------------------------------------------------------------------------
# amalgamation over the fixed points of a single map


def interval_decomposition(C: Sequence, t) -> tuple:
    """``(a(t), b(t))``: the neighbours of ``t`` in ``C`` (``-inf``/``inf`` if none)."""
    C = sorted(C)
    if any(c == t for c in C):
        raise DomainError(f"{t} is a fixed point; the amalgamated predictor answers s0 there")
    a = max((c for c in C if c < t), default=-math.inf)
    b = min((c for c in C if c > t), default=math.inf)
    return a, b


@dataclass(frozen=True)
class FixedPointDecomposition:
    C: tuple

    @property
    def intervals(self) -> list[tuple]:
        ends = [-math.inf, *self.C, math.inf]
        return list(zip(ends, ends[1:]))


def _anchor(a, b) -> Fraction:
    if a == -math.inf and b == math.inf:
        return Fraction(0)
    if a == -math.inf:
        return b - 1
    if b == math.inf:
        return a + 1
    return (a + b) / 2


@dataclass(frozen=True)
class CyclicPredictor:
    """Anonymous predictor for ``<phi|J>`` acting freely on one interval ``J``.

    A past on ``J`` is moved by a power of ``phi`` until its cutoff lies in the
    fundamental domain between ``x0`` and ``phi(x0)`` (half-open, lower end
    included); the prediction continues its last value.
    """

    interval: tuple
    phi: GroupElement

    def fundamental_domain(self) -> tuple:
        x0 = _anchor(*self.interval)
        y0 = apply(self.phi, x0)
        return (x0, y0) if y0 > x0 else (y0, x0)

    def canonical(self, f: PastFunction) -> tuple[int, PastFunction]:
        lo, hi = self.fundamental_domain()
        t = f.cutoff
        up = apply(self.phi, lo) > lo
        n = 0
        x = t
        for _ in range(ORBIT_CAP):
            if lo <= x < hi:
                break
            # move towards the fundamental domain
            forward = (x < lo) == up
            x = apply(self.phi if forward else invert(self.phi), x)
            n += 1 if forward else -1
        else:
            raise OrbitCapError(f"cutoff {t} never reached the fundamental domain")
        moved = precompose(f, iterate(self.phi, -n)) if n else f
        return n, _restrict_to_interval(moved, self.interval[0])

    def predict(self, f: PastFunction) -> int:
        _, g = self.canonical(f)
        return g.last_value


def _restrict_to_interval(f: PastFunction, a) -> PastFunction:
    """Drop the part of ``f`` at or below ``a`` (the past then lives on ``(a, t)``)."""
    if a == -math.inf:
        return f
    keep = [i for i, r in enumerate(f.breakpoints) if r > a]
    j = keep[0] if keep else f.k
    return PastFunction(f.breakpoints[j:], f.values[j:], f.cutoff)


@dataclass(frozen=True)
class AmalgamatedPredictor:
    decomposition: FixedPointDecomposition
    phi: GroupElement
    s0: int

    def piece(self, t) -> CyclicPredictor:
        return CyclicPredictor(interval_decomposition(self.decomposition.C, t), self.phi)

    def predict(self, f: PastFunction) -> int:
        if f.cutoff in self.decomposition.C:
            return self.s0
        return self.piece(f.cutoff).predict(f)


def build_amalgamated(phi: GroupElement, s0: int = 0) -> AmalgamatedPredictor:
    if phi.carrier != REAL:
        raise ContractError("amalgamation is built for maps of the real line")
    report = fixed_points(phi)
    if report.kind == "identity":
        raise ContractError("the identity fixes every point; its fixed set is not null")
    if report.kind != "none" and not (
        report.certified and all(isinstance(p, Fraction) for p in report.points)
    ):
        raise ContractError("fixed set must be a certified finite set of rationals")
    C = tuple(sorted(report.points))
    decomposition = FixedPointDecomposition(C)
    inv = invert(phi)
    for a, b in decomposition.intervals:
        x0 = _anchor(a, b)
        probes = [x0] + [(x0 + c) / 2 for c in (a, b) if math.isfinite(c)]
        for x in probes:
            for g in (phi, inv):
                y = apply(g, x)
                if not a < y < b:
                    raise ContractError(f"phi does not preserve the interval ({a}, {b}) at {x}")
    return AmalgamatedPredictor(decomposition, phi, s0)


# --------------------------------------------------------------------------
# JSON requests


def handle_request(obj: dict) -> dict:
    """Serve one CLI-facing JSON request (``predict``, ``weak``, ``badset``)."""
    op = obj.get("op")
    if op == "predict":
        return {"state": predict(past_from_json(obj["past"]))}
    if op == "weak":
        return {"state": predict_weak(holed_from_json(obj["holed"]))}
    if op == "badset":
        probes = obj.get("probes")
        if probes is not None:
            probes = [parse_rational(p) for p in probes]
        return bad_set(step_from_json(obj["total"]), probes).to_json()
    raise DomainError(f"unknown op {op!r}")
