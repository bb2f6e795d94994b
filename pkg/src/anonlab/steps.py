"""The countable function universe: finite-breakpoint step functions over Q.

A :class:`StepFunction` with breakpoints ``r_1 < ... < r_k`` and values
``v_0, ..., v_k`` takes ``v_0`` on ``(-inf, r_1)`` and ``v_i`` on
``[r_i, r_{i+1})``.  Functions are right-continuous, so the value at a
breakpoint belongs to the segment on its right.  Adjacent values always
differ; use :meth:`StepFunction.build` to merge redundant breakpoints.

The acting group is the rational affine group of positive slope.  Pasts are
moved with :func:`precompose`, which follows the convention that ``f o phi``
has domain ``(-inf, phi^-1(t_f))``.

Wellorder keys
--------------
:func:`wellorder_key` sends a step function to ``(tier, code)`` where the
tier is 0 for constants (the shift-invariant functions), 1 for a single
breakpoint (invariant under a scaling about it) and 2 otherwise.  The code is
a tuple of naturals of length ``2k + 2``::

    k = 0:   (0, v0)
    k = 1:   (1, v0, v1, enc(r1))
    k >= 2:  (k, v0..vk, enc(s3)..enc(sk), enc(r1), enc(r2 - r1))

with ``s_i = (r_i - r1) / (r2 - r1)`` the shape of the breakpoints and ``enc``
the signed Calkin-Wilf numbering from :mod:`anonlab.rationals`.  Keys compare
by tier, then length, then lexicographically; that is a wellorder.
"""
from __future__ import annotations

import functools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .errors import DomainError
from .homeo import Affine, GroupElement, apply, invert
from .rationals import as_fraction, decode_rational, encode_rational, format_rational, parse_rational


def _check_pieces(breakpoints, values):
    if len(values) != len(breakpoints) + 1:
        raise DomainError("need exactly one more value than breakpoints")
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        if not lo < hi:
            raise DomainError("breakpoints must be strictly increasing")
    for u, v in zip(values, values[1:]):
        if u == v:
            raise DomainError("adjacent values must differ (redundant breakpoint)")
    for v in values:
        if not isinstance(v, int) or v < 0:
            raise DomainError(f"state {v!r} is not a natural number")


def _merged(breakpoints, values):
    bps, vals = [], [values[0]]
    for r, v in zip(breakpoints, values[1:]):
        if v != vals[-1]:
            bps.append(r)
            vals.append(v)
    return tuple(bps), tuple(vals)


@dataclass(frozen=True)
class Alphabet:
    names: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) < 2:
            raise DomainError("the state alphabet needs at least two states")

    def __len__(self):
        return len(self.names)

    def check(self, state: int) -> int:
        if not 0 <= state < len(self.names):
            raise DomainError(f"state {state} outside alphabet of size {len(self.names)}")
        return state

    @classmethod
    def of_size(cls, n: int) -> "Alphabet":
        return cls(tuple(f"s{i}" for i in range(n)))


@dataclass(frozen=True)
class StepFunction:
    breakpoints: tuple = ()
    values: tuple = (0,)

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(as_fraction(r) for r in self.breakpoints))
        object.__setattr__(self, "values", tuple(self.values))
        _check_pieces(self.breakpoints, self.values)

    @classmethod
    def build(cls, breakpoints, values) -> "StepFunction":
        bps = tuple(as_fraction(r) for r in breakpoints)
        return cls(*_merged(bps, tuple(values)))

    @classmethod
    def constant(cls, v: int) -> "StepFunction":
        return cls((), (v,))

    @property
    def k(self) -> int:
        return len(self.breakpoints)

    def __call__(self, x) -> int:
        return self.values[bisect_right(self.breakpoints, x)]


@dataclass(frozen=True)
class PastFunction:
    """A step function known only on ``(-inf, cutoff)``."""

    breakpoints: tuple
    values: tuple
    cutoff: Fraction

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(as_fraction(r) for r in self.breakpoints))
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "cutoff", as_fraction(self.cutoff))
        _check_pieces(self.breakpoints, self.values)
        if self.breakpoints and not self.breakpoints[-1] < self.cutoff:
            raise DomainError("every breakpoint of a past must lie below its cutoff")

    @property
    def k(self) -> int:
        return len(self.breakpoints)

    @property
    def last_value(self) -> int:
        return self.values[-1]

    def __call__(self, x) -> int:
        if not x < self.cutoff:
            raise DomainError(f"{x} is not below the cutoff {self.cutoff}")
        return self.values[bisect_right(self.breakpoints, x)]


@dataclass(frozen=True)
class HoledFunction:
    """A total step function with its value at ``hole`` forgotten."""

    body: StepFunction
    hole: Fraction

    def __post_init__(self):
        object.__setattr__(self, "hole", as_fraction(self.hole))

    def __call__(self, x) -> int:
        if x == self.hole:
            raise DomainError(f"{x} is the hole")
        return self.body(x)


# --------------------------------------------------------------------------
# basic operations


def restrict(H: StepFunction, t) -> PastFunction:
    """``H`` restricted to ``(-inf, t)``."""
    t = as_fraction(t)
    j = bisect_left(H.breakpoints, t)
    bps, vals = _merged(H.breakpoints[:j], H.values[: j + 1])
    return PastFunction(bps, vals, t)


def _preimage(phi: GroupElement, x) -> Fraction:
    y = apply(invert(phi), x)
    if not isinstance(y, Fraction):
        raise DomainError(f"{phi!r} does not map rationals to rationals exactly")
    return y


def precompose(f, phi: GroupElement):
    """``f o phi`` for a past or a total step function; exact.

    Breakpoints move to their preimages under ``phi`` and a past's cutoff
    becomes ``phi^-1(t_f)``.
    """
    bps = tuple(_preimage(phi, r) for r in f.breakpoints)
    if isinstance(f, PastFunction):
        return PastFunction(bps, f.values, _preimage(phi, f.cutoff))
    if isinstance(f, StepFunction):
        return StepFunction(bps, f.values)
    raise TypeError(f"cannot precompose {type(f).__name__}")


def is_invariant(F: StepFunction, phi: GroupElement) -> bool:
    """``F == F o phi``, decided exactly."""
    return precompose(F, phi) == F


def extends(F: StepFunction, f: PastFunction) -> bool:
    """True iff ``F`` agrees with ``f`` on ``(-inf, t_f)``."""
    return restrict(F, f.cutoff) == f


# --------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class OrbitCanonicalForm:
    """``normalized == precompose(original, normalizer)``."""

    normalized: PastFunction
    normalizer: Affine


def canonical_form(f: PastFunction) -> OrbitCanonicalForm:
    """Orbit representative of a past under the rational affine group.

    With breakpoints, the first breakpoint goes to 0 and the cutoff to 1;
    a constant past is shifted so that its cutoff is 0.
    """
    if f.k == 0:
        phi = Affine(1, f.cutoff)
    else:
        r1 = f.breakpoints[0]
        phi = Affine(f.cutoff - r1, r1)
    return OrbitCanonicalForm(precompose(f, phi), phi)


def classify_invariance(F: StepFunction) -> int:
    """0: invariant under a non-identity shift; 1: under some other
    non-identity affine map (a scaling about its only breakpoint); 2: neither."""
    return min(F.k, 2)


def orbit_witness(F: StepFunction, f: PastFunction) -> Affine | None:
    """Some ``phi`` with ``F`` extending ``f o phi``, or None if there is none.

    The returned map is the one with the largest admissible cutoff image
    ``phi^-1(t_f)`` capped by the natural choice (slope 1 when free).
    """
    k, t = f.k, f.cutoff
    if F.k < k or F.values[: k + 1] != f.values:
        return None
    g = F.breakpoints
    nxt = g[k] if F.k > k else None
    if k == 0:
        # psi = phi^-1 sends the cutoff at or below the first breakpoint of F
        psi = Affine(1, 0 if nxt is None else min(0, nxt - t))
    elif k == 1:
        r1 = f.breakpoints[0]
        slope = Fraction(1)
        if nxt is not None:
            slope = min(slope, (nxt - g[0]) / (t - r1))
        psi = Affine(slope, g[0] - slope * r1)
    else:
        r1, r2 = f.breakpoints[0], f.breakpoints[1]
        slope = (g[1] - g[0]) / (r2 - r1)
        psi = Affine(slope, g[0] - slope * r1)
        if any(apply(psi, r) != gi for r, gi in zip(f.breakpoints, g)):
            return None
        if nxt is not None and apply(psi, t) > nxt:
            return None
    phi = invert(psi)
    assert extends(F, precompose(f, phi))
    return phi


def witness_from_tail(F: StepFunction, f: PastFunction) -> Affine | None:
    """A second witness solved independently of :func:`orbit_witness`.

    For two or more breakpoints it is solved from the last two breakpoints
    instead of the first two; with fewer breakpoints the witness is not
    unique and a different member of the witness family is returned.
    """
    if orbit_witness(F, f) is None:
        return None
    k, t = f.k, f.cutoff
    g = F.breakpoints
    if k == 0:
        first = g[0] if F.k else t + 1
        psi = Affine(Fraction(1, 3), first - Fraction(1, 3) * t - 1)
    elif k == 1:
        r1 = f.breakpoints[0]
        top = g[1] if F.k > 1 else g[0] + 2 * (t - r1)
        slope = (top - g[0]) / (2 * (t - r1))
        psi = Affine(slope, g[0] - slope * r1)
    else:
        ra, rb = f.breakpoints[k - 2], f.breakpoints[k - 1]
        slope = (g[k - 1] - g[k - 2]) / (rb - ra)
        psi = Affine(slope, g[k - 1] - slope * rb)
    phi = invert(psi)
    return phi if extends(F, precompose(f, phi)) else None


# --------------------------------------------------------------------------
# wellorder keys


@functools.total_ordering
@dataclass(frozen=True)
class WellOrderKey:
    tier: int
    code: tuple

    def sort_tuple(self):
        return (self.tier, len(self.code), self.code)

    def __lt__(self, other: "WellOrderKey"):
        return self.sort_tuple() < other.sort_tuple()


def wellorder_key(F: StepFunction) -> WellOrderKey:
    k = F.k
    if k == 0:
        code = (0, F.values[0])
    elif k == 1:
        code = (1, *F.values, encode_rational(F.breakpoints[0]))
    else:
        r1, r2 = F.breakpoints[0], F.breakpoints[1]
        span = r2 - r1
        shape = [encode_rational((r - r1) / span) for r in F.breakpoints[2:]]
        code = (k, *F.values, *shape, encode_rational(r1), encode_rational(span))
    return WellOrderKey(classify_invariance(F), code)


def decode_key(code: Sequence[int]) -> StepFunction:
    """Inverse of :func:`wellorder_key` on codes; ValueError for invalid codes."""
    if not code:
        raise ValueError("empty code")
    k = code[0]
    if len(code) != 2 * k + 2:
        raise ValueError("code length does not match its breakpoint count")
    values = tuple(code[1 : k + 2])
    if k == 0:
        bps = ()
    elif k == 1:
        bps = (decode_rational(code[3]),)
    else:
        shape = [decode_rational(c) for c in code[k + 2 : 2 * k]]
        r1, span = decode_rational(code[-2]), decode_rational(code[-1])
        if span <= 0:
            raise ValueError("non-positive span")
        bps = (r1, r1 + span, *(r1 + s * span for s in shape))
    try:
        F = StepFunction(bps, values)
    except DomainError as exc:
        raise ValueError(str(exc)) from exc
    if wellorder_key(F).code != tuple(code):
        raise ValueError("code is not canonical")
    return F


def _tier_of_length(k: int) -> int:
    return min(k, 2)


def codes_below(
    key: WellOrderKey, bound: int, prune: Callable[[tuple], bool] | None = None
) -> Iterator[tuple]:
    """All valid codes strictly below ``key`` whose free entries are <= bound.

    Entries forced equal to ``key`` are exempt from the bound.  ``prune``
    receives each partial code and may cut a subtree; it must only reject
    prefixes no completion of which matters to the caller.
    """
    K = key.code[0]
    for k in range(0, K + 1):
        length = 2 * k + 2
        tight_possible = k == K

        def rec(prefix, tight):
            if prune is not None and prune(prefix):
                return
            pos = len(prefix)
            if pos == length:
                if tight:
                    return  # equal to key, not strictly below
                try:
                    decode_key(prefix)
                except ValueError:
                    return
                yield prefix
                return
            if not tight:
                for c in range(bound + 1):
                    yield from rec(prefix + (c,), False)
                return
            forced = key.code[pos]
            for c in range(min(forced - 1, bound) + 1):
                yield from rec(prefix + (c,), False)
            yield from rec(prefix + (forced,), True)

        yield from rec((k,), tight_possible)


@dataclass
class MinimalityCertificate:
    examined: int
    bound: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _extension_prune(f: PastFunction) -> Callable[[tuple], bool]:
    """Necessary conditions for a code's function to extend a member of ``f o U``.

    An extension needs at least ``k`` breakpoints, must repeat the values of
    ``f`` and, when it has ``k >= 3`` breakpoints itself, the affine shape of
    the breakpoints of ``f``.
    """
    k = f.k
    shape = []
    if k >= 3:
        r1, r2 = f.breakpoints[0], f.breakpoints[1]
        shape = [encode_rational((r - r1) / (r2 - r1)) for r in f.breakpoints[2:]]

    def prune(prefix):
        kk = prefix[0]
        if kk < k:
            return True
        for pos in range(1, min(len(prefix), k + 2)):
            if prefix[pos] != f.values[pos - 1]:
                return True
        if kk == k:
            for i, c in enumerate(shape):
                pos = k + 2 + i
                if pos < len(prefix) and prefix[pos] != c:
                    return True
        return False

    return prune


def certify_minimality(f: PastFunction, bound: int = 4, pruned: bool = True) -> MinimalityCertificate:
    """Enumerate every code below ``key(least_extension(f))`` (free entries
    bounded by ``bound``) and confirm none extends a member of ``f o U``."""
    F = least_extension(f)
    key = wellorder_key(F)
    cert = MinimalityCertificate(0, bound)
    for code in codes_below(key, bound, _extension_prune(f) if pruned else None):
        cert.examined += 1
        G = decode_key(code)
        if orbit_witness(G, f) is not None:
            cert.violations.append(G)
    return cert


@functools.lru_cache(maxsize=4096)
def least_extension(f: PastFunction) -> StepFunction:
    """The key-least total step function extending some member of ``f o U``."""
    if f.k == 0:
        return StepFunction.constant(f.values[0])
    if f.k == 1:
        return StepFunction((Fraction(0),), f.values)
    r1, r2 = f.breakpoints[0], f.breakpoints[1]
    span = r2 - r1
    return StepFunction(tuple((r - r1) / span for r in f.breakpoints), f.values)


# --------------------------------------------------------------------------
# wire format


def step_to_json(F) -> dict:
    obj = {"breakpoints": [format_rational(r) for r in F.breakpoints], "values": list(F.values)}
    if isinstance(F, PastFunction):
        obj["cutoff"] = format_rational(F.cutoff)
    return obj


def holed_to_json(g: HoledFunction) -> dict:
    obj = step_to_json(g.body)
    obj["hole"] = format_rational(g.hole)
    return obj


def _pieces(obj):
    try:
        bps = tuple(parse_rational(r) for r in obj["breakpoints"])
        values = tuple(int(v) for v in obj["values"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed step function {obj!r}: {exc}") from exc
    return bps, values


def step_from_json(obj: dict) -> StepFunction:
    return StepFunction(*_pieces(obj))


def past_from_json(obj: dict) -> PastFunction:
    bps, values = _pieces(obj)
    try:
        cutoff = parse_rational(obj["cutoff"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed past {obj!r}: {exc}") from exc
    return PastFunction(bps, values, cutoff)


def holed_from_json(obj: dict) -> HoledFunction:
    try:
        hole = parse_rational(obj["hole"])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed holed function {obj!r}: {exc}") from exc
    return HoledFunction(step_from_json(obj), hole)


def alphabet_from_json(obj: dict) -> Alphabet:
    try:
        return Alphabet(tuple(obj["alphabet"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed alphabet {obj!r}") from exc
