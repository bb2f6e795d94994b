"""Exact algebra for increasing homeomorphisms of an open interval.

Elements are immutable values.  Rational affine maps of the line and power
maps of (0, 1) compose and invert exactly; everything else (conjugates by a
carrier transfer, mixed words) is evaluated in binary64 and compared with the
absolute tolerance :data:`NUMERIC_TOL`.

Composition follows the usual convention: ``compose(g, h)`` is ``g o h``, so
``Word((g, h))`` applies ``h`` first.
"""
from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import ContractError, DomainError
from .rationals import as_fraction, format_rational, parse_rational

Scalar = Union[Fraction, float]

NUMERIC_TOL = 1e-12
PROBE_COUNT = 17


# --------------------------------------------------------------------------
# carriers


@dataclass(frozen=True)
class Interval:
    """Open interval; ``None`` stands for an infinite endpoint."""

    lower: Fraction | None = None
    upper: Fraction | None = None

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise DomainError(f"empty interval ({self.lower}, {self.upper})")

    def contains(self, x) -> bool:
        if isinstance(x, float) and math.isnan(x):
            return False
        if self.lower is not None and not x > self.lower:
            return False
        if self.upper is not None and not x < self.upper:
            return False
        return True

    def probes(self) -> list[Fraction]:
        """The canonical 17-point identity probe grid (no integers on the line)."""
        if self.lower is None and self.upper is None:
            return [Fraction(i - 8) + Fraction(i + 1, 19) for i in range(PROBE_COUNT)]
        if self.lower is not None and self.upper is not None:
            width = self.upper - self.lower
            return [self.lower + width * Fraction(i + 1, PROBE_COUNT + 1) for i in range(PROBE_COUNT)]
        if self.lower is not None:
            return [self.lower + Fraction(i + 1, 3) for i in range(PROBE_COUNT)]
        return [self.upper - Fraction(i + 1, 3) for i in range(PROBE_COUNT)]

    def __str__(self):
        lo = "-inf" if self.lower is None else str(self.lower)
        hi = "+inf" if self.upper is None else str(self.upper)
        return f"({lo}, {hi})"


REAL = Interval()
UNIT = Interval(Fraction(0), Fraction(1))


@dataclass(frozen=True)
class CarrierMap:
    """Named increasing homeomorphism between two carriers, evaluated in binary64."""

    name: str
    source: Interval
    target: Interval
    forward: Callable[[float], float]
    backward: Callable[[float], float]
    inverse_name: str

    def __call__(self, x):
        if not self.source.contains(x):
            raise DomainError(f"{x} outside source {self.source} of {self.name}")
        return self.forward(float(x))

    def inverse(self) -> "CarrierMap":
        return CARRIER_MAPS[self.inverse_name]

    def round_trip_error(self, xs: Iterable) -> float:
        return max(abs(self.backward(self.forward(float(x))) - float(x)) for x in xs)


def _logit(x: float) -> float:
    return math.log(x) - math.log1p(-x)


def _expit(y: float) -> float:
    if y >= 0:
        return 1.0 / (1.0 + math.exp(-y))
    e = math.exp(y)
    return e / (1.0 + e)


LOGIT = CarrierMap("logit", UNIT, REAL, _logit, _expit, "expit")
EXPIT = CarrierMap("expit", REAL, UNIT, _expit, _logit, "logit")
CARRIER_MAPS = {"logit": LOGIT, "expit": EXPIT}


# --------------------------------------------------------------------------
# elements


class GroupElement:
    """Base class; concrete kinds are the frozen dataclasses below."""

    carrier: Interval

    def __call__(self, x):
        return apply(self, x)


@dataclass(frozen=True)
class Affine(GroupElement):
    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", as_fraction(self.b))
        if self.a <= 0:
            raise DomainError("affine slope must be positive")

    @property
    def carrier(self):
        return REAL

    def __repr__(self):
        return f"Affine({self.a}, {self.b})"


@dataclass(frozen=True)
class Power(GroupElement):
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.alpha <= 0:
            raise DomainError("power exponent must be positive")

    @property
    def carrier(self):
        return UNIT

    def __repr__(self):
        return f"Power({self.alpha})"


@dataclass(frozen=True)
class Lifted(GroupElement):
    """Integer-periodic lift ``x -> floor(x) + base(frac(x))`` of a power map.

    It fixes every integer and commutes with every integer shift.
    """

    base: Power

    @property
    def carrier(self):
        return REAL

    def __repr__(self):
        return f"Lifted({self.base!r})"


@dataclass(frozen=True)
class Word(GroupElement):
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise DomainError("a word needs at least one factor")
        carriers = {f.carrier for f in self.factors}
        if len(carriers) != 1:
            raise DomainError("word factors must share one carrier")

    @property
    def carrier(self):
        return self.factors[0].carrier


@dataclass(frozen=True)
class Conjugate(GroupElement):
    """``via o base o via^-1`` acting on ``via.target``."""

    base: GroupElement
    via: CarrierMap

    def __post_init__(self):
        if self.base.carrier != self.via.source:
            raise DomainError("conjugating map must start on the carrier of the base")

    @property
    def carrier(self):
        return self.via.target

    def __repr__(self):
        return f"Conjugate({self.base!r}, {self.via.name})"


def identity(carrier: Interval = REAL) -> GroupElement:
    if carrier == REAL:
        return Affine(1, 0)
    if carrier == UNIT:
        return Power(1)
    raise DomainError(f"no built-in identity on {carrier}")


# --------------------------------------------------------------------------
# evaluation


def _exact_root(q: Fraction, n: int) -> Fraction | None:
    def iroot(m):
        r = round(m ** (1.0 / n)) if m < 2**1000 else int(math.exp(math.log(m) / n))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**n == m:
                return c
        return None

    num, den = iroot(q.numerator), iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _power_value(alpha: Fraction, x):
    if isinstance(x, Fraction):
        if alpha.denominator == 1:
            return x ** alpha.numerator
        if alpha.denominator <= 64:
            root = _exact_root(x ** alpha.numerator, alpha.denominator)
            if root is not None:
                return root
    return float(x) ** float(alpha)


def apply(g: GroupElement, x):
    """Evaluate ``g(x)``; exact for rational input wherever the kind allows."""
    if isinstance(x, int) and not isinstance(x, bool):
        x = Fraction(x)
    if not g.carrier.contains(x):
        raise DomainError(f"{x} outside carrier {g.carrier}")
    return _apply(g, x)


def _apply(g, x):
    if isinstance(g, Affine):
        if isinstance(x, Fraction):
            return g.a * x + g.b
        return float(g.a) * x + float(g.b)
    if isinstance(g, Power):
        return _power_value(g.alpha, x)
    if isinstance(g, Lifted):
        n = math.floor(x)
        frac = x - n
        if frac == 0:
            return x
        return n + _power_value(g.base.alpha, frac)
    if isinstance(g, Word):
        for f in reversed(g.factors):
            x = _apply(f, x)
        return x
    if isinstance(g, Conjugate):
        inner = g.via.backward(float(x))
        # clamp round-off back into the base carrier
        src = g.via.source
        if src.lower is not None and inner <= src.lower:
            inner = math.nextafter(float(src.lower), math.inf)
        if src.upper is not None and inner >= src.upper:
            inner = math.nextafter(float(src.upper), -math.inf)
        return g.via.forward(float(_apply(g.base, inner)))
    raise TypeError(f"unknown element {g!r}")


def close(u, v, tol: float = NUMERIC_TOL) -> bool:
    """Exact equality for two rationals, absolute tolerance otherwise."""
    if isinstance(u, Fraction) and isinstance(v, Fraction):
        return u == v
    return abs(float(u) - float(v)) <= tol


# --------------------------------------------------------------------------
# group operations


def is_identity(g: GroupElement) -> bool:
    if isinstance(g, Affine):
        return g.a == 1 and g.b == 0
    if isinstance(g, Power):
        return g.alpha == 1
    if isinstance(g, Lifted):
        return g.base.alpha == 1
    if isinstance(g, Conjugate):
        return is_identity(g.base)
    return all(close(_apply(g, p), p) for p in g.carrier.probes())


def _merge(g, h):
    """Exact product of two same-kind elements, or None."""
    if isinstance(g, Affine) and isinstance(h, Affine):
        return Affine(g.a * h.a, g.a * h.b + g.b)
    if isinstance(g, Power) and isinstance(h, Power):
        return Power(g.alpha * h.alpha)
    if isinstance(g, Lifted) and isinstance(h, Lifted):
        return Lifted(Power(g.base.alpha * h.base.alpha))
    if isinstance(g, Conjugate) and isinstance(h, Conjugate) and g.via == h.via:
        return conjugate(compose(g.base, h.base), g.via)
    return None


def _word(factors: Sequence[GroupElement], carrier: Interval) -> GroupElement:
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Word) else (f,))
    out: list[GroupElement] = []
    for f in flat:
        if isinstance(f, (Affine, Power, Lifted)) and is_identity(f):
            continue
        if out:
            merged = _merge(out[-1], f)
            if merged is not None:
                out.pop()
                if not (isinstance(merged, (Affine, Power, Lifted)) and is_identity(merged)):
                    out.append(merged)
                continue
        out.append(f)
    if not out:
        return identity(carrier)
    if len(out) == 1:
        return out[0]
    return Word(tuple(out))


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """``g o h``."""
    if g.carrier != h.carrier:
        raise DomainError(f"carrier mismatch: {g.carrier} vs {h.carrier}")
    return _word((g, h), g.carrier)


def invert(g: GroupElement) -> GroupElement:
    if isinstance(g, Affine):
        return Affine(1 / g.a, -g.b / g.a)
    if isinstance(g, Power):
        return Power(1 / g.alpha)
    if isinstance(g, Lifted):
        return Lifted(Power(1 / g.base.alpha))
    if isinstance(g, Conjugate):
        return Conjugate(invert(g.base), g.via)
    if isinstance(g, Word):
        return _word([invert(f) for f in reversed(g.factors)], g.carrier)
    raise TypeError(f"unknown element {g!r}")


def iterate(g: GroupElement, n: int) -> GroupElement:
    """``g^n`` for any integer n (negative powers iterate the inverse)."""
    base = g if n >= 0 else invert(g)
    result = identity(g.carrier) if g.carrier in (REAL, UNIT) else None
    for _ in range(abs(n)):
        result = base if result is None else compose(result, base)
    if result is None:
        raise DomainError("g^0 needs a built-in identity on the carrier")
    return result


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """``g h g^-1 h^-1``."""
    if g.carrier != h.carrier:
        raise DomainError(f"carrier mismatch: {g.carrier} vs {h.carrier}")
    return _word((g, h, invert(g), invert(h)), g.carrier)


def conjugate(g: GroupElement, via: CarrierMap) -> GroupElement:
    """Transfer ``g`` along ``via``: the element ``via o g o via^-1``."""
    if g.carrier != via.source:
        raise DomainError(f"{via.name} starts on {via.source}, element lives on {g.carrier}")
    if isinstance(g, (Affine, Power, Lifted)) and is_identity(g):
        return identity(via.target)
    if isinstance(g, Conjugate) and g.via.inverse_name == via.name:
        return g.base
    return Conjugate(g, via)


# --------------------------------------------------------------------------
# fixed points


@dataclass(frozen=True)
class FixedPointReport:
    """``kind`` is one of ``none``, ``singleton``, ``identity``, ``finite``.

    ``certified`` is False for results found by grid scanning (best effort) or
    truncated to a window.
    """

    kind: str
    points: tuple = ()
    certified: bool = True

    def contains(self, x) -> bool:
        if self.kind == "identity":
            return True
        return any(close(p, x) for p in self.points)


def fixed_points(g: GroupElement, grid: Sequence | None = None) -> FixedPointReport:
    if isinstance(g, Affine):
        if g.a == 1:
            return FixedPointReport("identity") if g.b == 0 else FixedPointReport("none")
        return FixedPointReport("singleton", (g.b / (1 - g.a),))
    if isinstance(g, Power):
        return FixedPointReport("identity") if g.alpha == 1 else FixedPointReport("none")
    if isinstance(g, Lifted):
        if g.base.alpha == 1:
            return FixedPointReport("identity")
        window = grid if grid is not None else g.carrier.probes()
        lo, hi = math.ceil(min(window)), math.floor(max(window))
        return FixedPointReport("finite", tuple(Fraction(n) for n in range(lo, hi + 1)), certified=False)
    if isinstance(g, Conjugate):
        inner = fixed_points(g.base, None if grid is None else [g.via.backward(float(x)) for x in grid])
        if inner.kind in ("identity", "none"):
            return inner
        pts = tuple(g.via(p) for p in inner.points)
        return FixedPointReport("singleton" if len(pts) == 1 else "finite", pts, False)
    if is_identity(g):
        return FixedPointReport("identity", certified=False)
    return _scan_fixed_points(g, grid if grid is not None else g.carrier.probes())


def _scan_fixed_points(g, grid) -> FixedPointReport:
    """Sign changes of g(x) - x on the grid, refined by bisection."""
    xs = sorted(grid)
    found = []
    prev_x, prev_d = None, None
    for x in xs:
        d = float(_apply(g, x)) - float(x)
        if d == 0:
            found.append(x)
        elif prev_d is not None and prev_d * d < 0:
            lo, hi, dlo = float(prev_x), float(x), prev_d
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                dm = float(_apply(g, mid)) - mid
                if dm == 0 or hi - lo <= NUMERIC_TOL:
                    break
                if (dm < 0) == (dlo < 0):
                    lo, dlo = mid, dm
                else:
                    hi = mid
            found.append(0.5 * (lo + hi))
        prev_x, prev_d = x, d
    if not found:
        return FixedPointReport("none", certified=False)
    kind = "singleton" if len(found) == 1 else "finite"
    return FixedPointReport(kind, tuple(found), certified=False)


# --------------------------------------------------------------------------
# Hoelder order


class Ordering(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"

    def __str__(self):
        return self.value


def _cmp(u, v) -> Ordering:
    if close(u, v):
        return Ordering.EQUAL
    return Ordering.LESS if u < v else Ordering.GREATER


def holder_compare(g: GroupElement, h: GroupElement, x0) -> Ordering:
    """Compare ``g`` and ``h`` by their values at ``x0``.

    For a family acting freely this is independent of ``x0`` and agrees with
    the pointwise order on the whole carrier; for other families it is only
    the one-point comparison (see :func:`order_family`).
    """
    if isinstance(g, Power) and isinstance(h, Power) and isinstance(x0, Fraction):
        # x^(a/b) vs x^(c/d): raise both sides to the power b*d
        a, b = g.alpha.numerator, g.alpha.denominator
        c, d = h.alpha.numerator, h.alpha.denominator
        return _cmp(x0 ** (a * d), x0 ** (c * b))
    return _cmp(apply(g, x0), apply(h, x0))


@dataclass(frozen=True)
class Counterexample:
    element: GroupElement
    point: object


def verify_free_action(family: Iterable[GroupElement], sample: Iterable) -> Counterexample | None:
    """None when no non-identity member fixes a sampled point."""
    sample = list(sample)
    for g in family:
        if is_identity(g):
            continue
        for p in sample:
            if not g.carrier.contains(p):
                continue
            if close(apply(g, p), p):
                return Counterexample(g, p)
    return None


def order_family(family: Sequence[GroupElement], x0, sample: Sequence | None = None):
    """Sort ``family`` by :func:`holder_compare` at ``x0``.

    Returns ``(ordered, caveat)``; ``caveat`` is True unless the quotients
    ``h^-1 g`` were checked fixed-point free on ``sample`` (defaults to the
    probe grid), i.e. unless the one-point order is known to be the pointwise one.
    """
    family = list(family)
    if sample is None and family:
        sample = family[0].carrier.probes()
    quotients = [compose(invert(h), g) for i, g in enumerate(family) for h in family[i + 1:]]
    caveat = verify_free_action(quotients, sample or []) is not None
    key = functools.cmp_to_key(
        lambda g, h: {Ordering.LESS: -1, Ordering.EQUAL: 0, Ordering.GREATER: 1}[holder_compare(g, h, x0)]
    )
    return sorted(family, key=key), caveat


def archimedean_witness(phi: GroupElement, psi: GroupElement, x0, max_n: int = 1000) -> int | None:
    """Least ``n <= max_n`` with ``psi(x0) < phi^n(x0)``; None when exhausted.

    Requires ``id < phi`` at ``x0``.
    """
    y = apply(phi, x0)
    if not y > x0 or close(y, x0):
        raise ContractError("archimedean_witness needs phi(x0) > x0")
    target = apply(psi, x0)
    for n in range(1, max_n + 1):
        if target < y and not close(target, y):
            return n
        y = apply(phi, y)
    return None


# --------------------------------------------------------------------------
# fixed-point arguments


class PropagationError(ContractError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


def fixed_point_propagation(phi: GroupElement, tau: GroupElement, x1, steps: int, sample=None) -> list:
    """Push the fixed point ``x1`` of ``phi`` along ``tau``: ``x_{n+1} = tau(x_n)``.

    If ``tau`` commutes with ``phi`` every ``x_n`` is again fixed by ``phi``.
    Returns ``[x_1, ..., x_{steps+1}]``; raises :class:`PropagationError`
    carrying the 1-based index of the first point where a hypothesis fails.
    """
    if not close(apply(phi, x1), x1):
        raise PropagationError(f"x1={x1} is not fixed by phi", 1)
    x2 = apply(tau, x1)
    if close(x2, x1):
        raise PropagationError("tau(x1) = x1, so there is no second fixed point x2", 2)
    probes = list(sample) if sample is not None else phi.carrier.probes()
    comm = commutator(tau, phi)
    for p in probes:
        if not close(apply(comm, p), p, 1e-9):
            raise PropagationError(f"tau and phi do not commute at {p}", 0)
    points = [x1]
    x = x1
    for n in range(steps):
        x = apply(tau, x)
        if not close(apply(phi, x), x, 1e-9):
            raise PropagationError(f"x_{n + 2}={x} is not fixed by phi", n + 2)
        points.append(x)
    return points


def iterate_fixed_points_equal(phi: GroupElement, n: int, sample: Iterable) -> Counterexample | None:
    """Check on ``sample`` that ``phi^n`` fixes x exactly when ``phi`` does."""
    if n == 0:
        raise ContractError("n must be non-zero")
    phin = iterate(phi, n)
    for x in sample:
        if close(apply(phi, x), x) != close(apply(phin, x), x):
            return Counterexample(phin, x)
    return None


# --------------------------------------------------------------------------
# wire format


def element_to_json(g: GroupElement) -> dict:
    if isinstance(g, Affine):
        return {"kind": "affine", "a": format_rational(g.a), "b": format_rational(g.b)}
    if isinstance(g, Power):
        return {"kind": "power", "alpha": format_rational(g.alpha)}
    if isinstance(g, Lifted):
        return {"kind": "lifted", "base": element_to_json(g.base)}
    if isinstance(g, Word):
        return {"kind": "word", "factors": [element_to_json(f) for f in g.factors]}
    if isinstance(g, Conjugate):
        return {"kind": "conjugate", "base": element_to_json(g.base), "via": g.via.name}
    raise TypeError(f"unknown element {g!r}")


def element_from_json(obj: dict) -> GroupElement:
    try:
        kind = obj["kind"]
        if kind == "affine":
            return Affine(parse_rational(obj["a"]), parse_rational(obj["b"]))
        if kind == "power":
            return Power(parse_rational(obj["alpha"]))
        if kind == "lifted":
            base = element_from_json(obj["base"])
            if not isinstance(base, Power):
                raise DomainError("lifted base must be a power map")
            return Lifted(base)
        if kind == "word":
            return Word(tuple(element_from_json(f) for f in obj["factors"]))
        if kind == "conjugate":
            return Conjugate(element_from_json(obj["base"]), CARRIER_MAPS[obj["via"]])
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed element {obj!r}: {exc}") from exc
    raise DomainError(f"unknown element kind {obj.get('kind')!r}")


def parse_element(text: str) -> GroupElement:
    """Short form ``affine:a,b`` / ``power:alpha`` / ``lifted:alpha``, or JSON."""
    s = text.strip()
    if s.startswith("{"):
        try:
            return element_from_json(json.loads(s))
        except json.JSONDecodeError as exc:
            raise DomainError(f"malformed element JSON: {exc}") from exc
    kind, _, rest = s.partition(":")
    try:
        parts = [parse_rational(p) for p in rest.split(",")] if rest else []
        if kind == "affine" and len(parts) == 2:
            return Affine(*parts)
        if kind == "power" and len(parts) == 1:
            return Power(parts[0])
        if kind == "lifted" and len(parts) == 1:
            return Lifted(Power(parts[0]))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed element {text!r}: {exc}") from exc
    raise DomainError(f"malformed element {text!r}")


def format_element(g: GroupElement) -> str:
    """Inverse of :func:`parse_element` (JSON for words and conjugates)."""
    def num(q):
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    if isinstance(g, Affine):
        return f"affine:{num(g.a)},{num(g.b)}"
    if isinstance(g, Power):
        return f"power:{num(g.alpha)}"
    if isinstance(g, Lifted):
        return f"lifted:{num(g.base.alpha)}"
    return json.dumps(element_to_json(g), sort_keys=True)
