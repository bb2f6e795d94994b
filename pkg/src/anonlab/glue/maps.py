"""The two kinds of family member: rational lines and glue maps.

A glue map rises from ``A = (p, q)`` over ``[p, p + delta]`` with derivative
``1 + gamma * b((x - p) / delta)``, so it leaves and arrives with slope 1 and
ends at height ``q + delta * (1 + gamma)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DomainError
from ..rationals import as_fraction, format_rational, parse_rational
from .bump import K_MAX, bump_integral, bump_values


@dataclass(frozen=True)
class LineSpec:
    """``y = y0 + slope * (x - x0)`` on the whole line."""

    slope: Fraction
    x0: Fraction
    y0: Fraction

    def __post_init__(self):
        for name in ("slope", "x0", "y0"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.slope <= 0:
            raise DomainError("family lines have positive slope")

    def contains(self, x) -> bool:
        return True

    def __call__(self, x):
        return self.y0 + self.slope * (x - self.x0)

    def deriv(self, x, k: int = 1):
        return self.slope if k == 1 else Fraction(0)

    def to_json(self) -> dict:
        return {"kind": "line", "slope": format_rational(self.slope),
                "x0": format_rational(self.x0), "y0": format_rational(self.y0)}


@dataclass(frozen=True)
class GlueSpec:
    p: Fraction
    q: Fraction
    delta: Fraction
    gamma: Fraction

    def __post_init__(self):
        for name in ("p", "q", "delta", "gamma"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.delta <= 0 or self.gamma <= 0:
            raise DomainError("glue maps need delta > 0 and gamma > 0")

    @property
    def end(self) -> Fraction:
        return self.p + self.delta

    @property
    def end_value(self) -> Fraction:
        return self.q + self.delta * (1 + self.gamma)

    def contains(self, x) -> bool:
        return self.p <= x <= self.end

    def __call__(self, x):
        return glue_eval(self, x)

    def deriv(self, x, k: int = 1):
        return glue_deriv(self, x, k)

    def to_json(self) -> dict:
        return {"kind": "glue", **{n: format_rational(getattr(self, n)) for n in ("p", "q", "delta", "gamma")}}


def member_from_json(obj: dict):
    kind = obj.get("kind")
    if kind == "line":
        return LineSpec(*(parse_rational(obj[n]) for n in ("slope", "x0", "y0")))
    if kind == "glue":
        return GlueSpec(*(parse_rational(obj[n]) for n in ("p", "q", "delta", "gamma")))
    raise DomainError(f"unknown family member kind {kind!r}")


# float inputs may miss an endpoint by rounding; they are clamped within this slack
FLOAT_SLACK = 1e-12


def _unit_coords(spec: GlueSpec, u: np.ndarray) -> np.ndarray:
    if np.any((u < -FLOAT_SLACK) | (u > 1 + FLOAT_SLACK)):
        raise DomainError(f"points outside [{spec.p}, {spec.end}]")
    return np.clip(u, 0.0, 1.0)


def _local(spec: GlueSpec, x) -> float:
    if isinstance(x, (Fraction, int)):
        if not spec.contains(x):
            raise DomainError(f"{x} lies outside [{spec.p}, {spec.end}]")
        return float((x - spec.p) / spec.delta)
    u = (x - float(spec.p)) / float(spec.delta)
    return float(_unit_coords(spec, np.array([u]))[0])


def glue_eval(spec: GlueSpec, x):
    """Value of the glue map; exact rationals at the two endpoints."""
    if isinstance(x, (Fraction, int)):
        if x == spec.p:
            return spec.q
        if x == spec.end:
            return spec.end_value
    u = _local(spec, x)
    return float(spec.q) + float(spec.delta) * (u + float(spec.gamma) * bump_integral(u))


def glue_deriv(spec: GlueSpec, x, k: int = 1) -> float:
    if not 1 <= k <= K_MAX:
        raise DomainError(f"derivative order {k} unsupported (1 <= k <= {K_MAX})")
    u = _local(spec, x)
    b = float(bump_values(np.array([u]), k - 1)[0])
    if k == 1:
        return 1.0 + float(spec.gamma) * b
    return float(spec.gamma / spec.delta ** (k - 1)) * b


def glue_values(spec: GlueSpec, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    p, d = float(spec.p), float(spec.delta)
    u = _unit_coords(spec, (xs - p) / d)
    return float(spec.q) + d * (u + float(spec.gamma) * bump_integral(u))


def glue_derivs(spec: GlueSpec, xs, k: int = 1) -> np.ndarray:
    if not 1 <= k <= K_MAX:
        raise DomainError(f"derivative order {k} unsupported (1 <= k <= {K_MAX})")
    xs = np.asarray(xs, dtype=np.float64)
    u = _unit_coords(spec, (xs - float(spec.p)) / float(spec.delta))
    b = bump_values(u, k - 1)
    if k == 1:
        return 1.0 + float(spec.gamma) * b
    return float(spec.gamma / spec.delta ** (k - 1)) * b
