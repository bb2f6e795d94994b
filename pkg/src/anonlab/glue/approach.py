"""Exact rational approach sequences toward a target point.

Starting below the slope-1 line ``L`` through the target ``(w, z)``, the
points ``A_n = (p_n, q_n)`` climb along glue maps whose amplitudes ``gamma_n``
are chosen so the vertical gap ``v_n`` to ``L`` collapses faster than any
power of the step ``delta_n``.  Every inequality is checked in exact
arithmetic and kept as a certificate entry.

The right-hand sequence is the point reflection of the left one through the
target: ``p -> 2w - p`` and ``q -> 2z - q``.  Because the bump is symmetric,
each reflected piece is again a glue map, starting at the reflected image of
``A_{n+1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import ContractError, DomainError
from ..rationals import as_fraction, format_rational
from .maps import GlueSpec, LineSpec


@dataclass(frozen=True)
class Inequality:
    name: str
    n: int
    lhs: Fraction
    rhs: Fraction
    relation: str

    @property
    def holds(self) -> bool:
        return {"<": self.lhs < self.rhs, "==": self.lhs == self.rhs}[self.relation]

    def to_json(self) -> dict:
        return {"name": self.name, "n": self.n, "lhs": format_rational(self.lhs),
                "rhs": format_rational(self.rhs), "relation": self.relation,
                "exact": True, "holds": self.holds}


@dataclass(frozen=True)
class ApproachSequence:
    """Indices are 1-based in the names and 0-based in the lists.

    ``p``, ``q`` and ``v`` run to ``N + 1``, ``delta`` to ``N + 1`` (the last
    step is needed by the final gamma inequality), ``gamma`` to ``N``.
    For ``side == "right"`` the stored ``p``, ``q`` are the reflected points.
    """

    side: str
    target: tuple
    depth: int
    p: tuple
    q: tuple
    delta: tuple
    gamma: tuple
    v: tuple
    certificate: tuple = field(repr=False, default=())

    @property
    def line(self) -> LineSpec:
        w, z = self.target
        return LineSpec(Fraction(1), w, z)

    @property
    def residual(self) -> Fraction:
        """Gap to the line at the last built point ``A_{N+1}``."""
        return self.v[-1]

    def piece(self, n: int) -> GlueSpec:
        """The n-th glue map (1-based) as a family member."""
        i = n - 1
        if self.side == "left":
            return GlueSpec(self.p[i], self.q[i], self.delta[i], self.gamma[i])
        return GlueSpec(self.p[i + 1], self.q[i + 1], self.delta[i], self.gamma[i])

    def verified(self) -> bool:
        return all(c.holds for c in self.certificate)

    def to_json(self) -> dict:
        fmt = lambda xs: [format_rational(x) for x in xs]
        return {
            "side": self.side, "target": fmt(self.target), "depth": self.depth,
            "p": fmt(self.p), "q": fmt(self.q), "delta": fmt(self.delta),
            "gamma": fmt(self.gamma), "v": fmt(self.v),
            "certificate": [c.to_json() for c in self.certificate],
        }


def snap_target(x, max_denominator: int = 10**9) -> Fraction:
    """Rational stand-in for a float coordinate (exact inputs pass through)."""
    if isinstance(x, float):
        return Fraction(x).limit_denominator(max_denominator)
    return as_fraction(x)


def _left_data(w, z, N, c, q1):
    p = [w - c / 2**n for n in range(1, N + 2)]
    delta = [c / 2 ** (n + 1) for n in range(1, N + 2)]
    L = lambda x: x - w + z
    q = [L(p[0]) - delta[0] / 2 if q1 is None else q1]
    v = [L(p[0]) - q[0]]
    gamma = []
    for n in range(1, N + 1):
        i = n - 1
        lo = max(Fraction(0), v[i] - delta[i + 1] ** (n + 1) / (n + 1))
        g = (lo + v[i]) / 2 / delta[i]
        gamma.append(g)
        q.append(q[i] + delta[i] * (1 + g))
        v.append(L(p[i + 1]) - q[i + 1])
    return p, q, delta, gamma, v


def _certificate(w, z, p, q, delta, gamma, v) -> list[Inequality]:
    """All inequalities, stated in left-side coordinates."""
    L = lambda x: x - w + z
    N = len(gamma)
    out = [Inequality("gap_positive", 1, Fraction(0), v[0], "<"),
           Inequality("base_gap_below_step", 1, v[0], delta[0], "<")]
    for n in range(1, N + 1):
        i = n - 1
        out += [
            Inequality("gap_is_vertical_distance", n, v[i], L(p[i]) - q[i], "=="),
            Inequality("step_positive", n, Fraction(0), delta[i], "<"),
            Inequality("step_below_one", n, delta[i], Fraction(1), "<"),
            Inequality("step_is_difference", n, delta[i], p[i + 1] - p[i], "=="),
            Inequality("gamma_positive", n, Fraction(0), gamma[i], "<"),
            Inequality("gamma_window_lower", n, v[i] - delta[i + 1] ** (n + 1) / (n + 1), gamma[i] * delta[i], "<"),
            Inequality("gamma_window_upper", n, gamma[i] * delta[i], v[i], "<"),
            Inequality("gap_bound", n, v[i], delta[i] ** n / n, "<"),
            Inequality("height_recursion", n, q[i + 1], q[i] + delta[i] * (1 + gamma[i]), "=="),
            Inequality("gap_recursion", n, v[i + 1], v[i] - gamma[i] * delta[i], "=="),
            Inequality("amplitude_ratio", n, gamma[i] / delta[i] ** (n - 1), Fraction(1, n), "<"),
            Inequality("p_increasing", n, p[i], p[i + 1], "<"),
            Inequality("q_increasing", n, q[i], q[i + 1], "<"),
        ]
    out.append(Inequality("gap_bound", N + 1, v[N], delta[N] ** (N + 1) / (N + 1), "<"))
    out.append(Inequality("p_below_target", N + 1, p[N], w, "<"))
    return out


def build_approach(target, side: str = "left", depth: int = 20, c=1, q1=None) -> ApproachSequence:
    """Build and verify the sequence; ``c`` scales the dyadic steps ``p_n = w - c/2^n``."""
    if depth < 1:
        raise DomainError("depth must be at least 1")
    if side not in ("left", "right"):
        raise DomainError("side is 'left' or 'right'")
    w, z = (snap_target(t) for t in target)
    c = as_fraction(c)
    if not 0 < c < 4:
        raise DomainError("the scale c must lie in (0, 4) so every step is below 1")
    p, q, delta, gamma, v = _left_data(w, z, depth, c, None if q1 is None else as_fraction(q1))
    cert = _certificate(w, z, p, q, delta, gamma, v)
    bad = [c for c in cert if not c.holds]
    if bad:
        raise ContractError(f"approach inequality failed: {bad[0]}")
    if side == "right":
        p = [2 * w - x for x in p]
        q = [2 * z - y for y in q]
    return ApproachSequence(side, (w, z), depth, tuple(p), tuple(q), tuple(delta),
                            tuple(gamma), tuple(v), tuple(cert))
