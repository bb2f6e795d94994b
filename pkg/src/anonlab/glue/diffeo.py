"""The assembled map G through a target point, and its certifiers.

G is a slope-1 line up to ``p_1``, then glue maps climbing toward the target,
the target value at ``w``, the mirrored glue maps and a second slope-1 line.
At finite depth N the stretch between ``p_{N+1}`` and ``w`` (and its mirror)
is not covered by glue maps; there G interpolates linearly, and that stretch
is reported as the truncated zone.

Internally G is handled through its offset from the slope-1 line ``L``
through the target, ``o(x) = L(x) - G(x)``.  The offsets are tiny near ``w``,
so finite differences of G are formed from them without cancellation against
the linear part.
"""
from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DomainError
from ..rationals import format_rational
from .approach import ApproachSequence, build_approach, snap_target
from .bump import bump_integral, bump_values, sup_norm
from .maps import GlueSpec, LineSpec

TRUNCATED = "truncated"


@dataclass(frozen=True)
class Piece:
    zone: str          # line, glue, truncated or hole
    side: str          # L, R or "" for the hole
    n: int | None
    lo: Fraction
    hi: Fraction
    member: LineSpec | GlueSpec | None

    @property
    def piece_id(self) -> str:
        if self.zone == "hole":
            return "hole"
        if self.zone == "glue":
            return f"glue-{self.side}{self.n}"
        return f"{self.zone}-{self.side}"

    @property
    def zone_label(self) -> str:
        return f"glue-{self.n}" if self.zone == "glue" else self.zone


class DiffeoAssembly:
    """G for a rational target at truncation depth N (see module docstring)."""

    def __init__(self, target, depth: int = 20, c=1):
        w, z = (snap_target(t) for t in target)
        self.target = (w, z)
        self.depth = depth
        self.left: ApproachSequence = build_approach((w, z), "left", depth, c)
        self.right: ApproachSequence = build_approach((w, z), "right", depth, c)
        L = self.left
        self.psi_left = LineSpec(Fraction(1), L.p[0], L.q[0])
        self.psi_right = LineSpec(Fraction(1), self.right.p[0], self.right.q[0])
        self._pf = np.array([float(x) for x in L.p])
        self._vf = np.array([float(x) for x in L.v])
        self._gd = np.array([float(g * d) for g, d in zip(L.gamma, L.delta)])
        self._df = np.array([float(d) for d in L.delta[:depth]])
        self._gf = np.array([float(g) for g in L.gamma])

    # ------------------------------------------------------------ geometry

    @property
    def w(self) -> Fraction:
        return self.target[0]

    @property
    def z(self) -> Fraction:
        return self.target[1]

    def line(self, x):
        return x - self.w + self.z

    def truncated_zone(self) -> tuple:
        """Open intervals ``(p_{N+1}, w)`` and ``(w, p^R_{N+1})``."""
        return (self.left.p[-1], self.w), (self.w, self.right.p[-1])

    @property
    def residual(self) -> Fraction:
        return self.left.residual

    def in_truncated_zone(self, x) -> bool:
        (a, b), (c, d) = self.truncated_zone()
        return a < x < b or c < x < d

    def pieces(self) -> list[Piece]:
        N, L, R = self.depth, self.left, self.right
        out = [Piece("line", "L", None, None, L.p[0], self.psi_left)]
        out += [Piece("glue", "L", n, L.p[n - 1], L.p[n], L.piece(n)) for n in range(1, N + 1)]
        out.append(Piece(TRUNCATED, "L", None, L.p[N], self.w, None))
        out.append(Piece("hole", "", None, self.w, self.w, None))
        out.append(Piece(TRUNCATED, "R", None, self.w, R.p[N], None))
        out += [Piece("glue", "R", n, R.p[n], R.p[n - 1], R.piece(n)) for n in range(N, 0, -1)]
        out.append(Piece("line", "R", None, R.p[0], None, self.psi_right))
        return out

    def locate(self, x) -> Piece:
        """Left pieces own their left endpoints; the last glue map owns both ends."""
        w = self.w
        if x == w:
            return Piece("hole", "", None, w, w, None)
        if x > w:
            mirrored = self._left_piece(2 * w - x)
            return self._mirror(mirrored)
        return self._left_piece(x)

    def _left_piece(self, x) -> Piece:
        L, N = self.left, self.depth
        if x < L.p[0]:
            return Piece("line", "L", None, None, L.p[0], self.psi_left)
        if x <= L.p[N]:
            n = min(bisect_right(L.p, x), N)
            return Piece("glue", "L", n, L.p[n - 1], L.p[n], L.piece(n))
        return Piece(TRUNCATED, "L", None, L.p[N], self.w, None)

    def _mirror(self, piece: Piece) -> Piece:
        w, R = self.w, self.right
        if piece.zone == "line":
            return Piece("line", "R", None, R.p[0], None, self.psi_right)
        if piece.zone == "glue":
            n = piece.n
            return Piece("glue", "R", n, R.p[n], R.p[n - 1], R.piece(n))
        return Piece(TRUNCATED, "R", None, w, R.p[-1], None)

    # ------------------------------------------------------------ evaluation

    def _left_offset(self, x):
        """Offset at a point left of (or at) w; exact when x is rational and G is affine there."""
        L, N, w = self.left, self.depth, self.w
        if x == w:
            return Fraction(0)
        if x < L.p[0]:
            return L.v[0]
        if x <= L.p[N]:
            n = min(bisect_right(L.p, x), N)
            i = n - 1
            if x == L.p[i] or x == L.p[n]:
                return L.v[i] if x == L.p[i] else L.v[n]
            u = float((x - L.p[i]) / L.delta[i]) if isinstance(x, Fraction) else (x - self._pf[i]) / self._df[i]
            if u <= 0.5:
                return float(L.v[i]) - self._gd[i] * bump_integral(u)
            return float(L.v[i + 1]) + self._gd[i] * bump_integral(1.0 - u)
        return L.v[N] * (w - x) / (w - L.p[N])

    def offset(self, x):
        """``L(x) - G(x)``; the right side is the negated mirror of the left."""
        if x > self.w:
            return -self._left_offset(2 * self.w - x)
        return self._left_offset(x)

    def value(self, x):
        o = self.offset(x)
        if isinstance(o, Fraction) and isinstance(x, (Fraction, int)):
            return self.line(Fraction(x)) - o
        return float(self.line(x)) - float(o)

    __call__ = value

    def deriv(self, x, k: int = 1) -> float:
        """Closed-form k-th derivative of the piece containing x (limit value at w)."""
        piece = self.locate(x)
        if piece.zone == "glue":
            return float(piece.member.deriv(x, k))
        if k > 1:
            return 0.0
        if piece.zone == TRUNCATED:
            return float(1 + self.residual / (self.w - self.left.p[-1]))
        return 1.0

    def _left_offsets(self, xl: np.ndarray) -> np.ndarray:
        N = self.depth
        w = float(self.w)
        idx = np.searchsorted(self._pf, xl, side="right")
        out = np.empty_like(xl)
        out[idx == 0] = self._vf[0]
        glue = (idx >= 1) & ((idx <= N) | (xl == self._pf[N]))
        i = np.minimum(idx[glue], N) - 1
        u = (xl[glue] - self._pf[i]) / self._df[i]
        low = u <= 0.5
        og = np.empty_like(u)
        og[low] = self._vf[i[low]] - self._gd[i[low]] * bump_integral(u[low])
        hi = ~low
        og[hi] = self._vf[i[hi] + 1] + self._gd[i[hi]] * bump_integral(1.0 - u[hi])
        out[glue] = og
        trunc = (idx > N) & ~glue
        out[trunc] = self._vf[N] * (w - xl[trunc]) / (w - self._pf[N])
        out[xl >= w] = 0.0
        return out

    def offsets(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        w = float(self.w)
        out = np.empty_like(xs)
        left = xs <= w
        out[left] = self._left_offsets(xs[left])
        out[~left] = -self._left_offsets(2 * w - xs[~left])
        return out

    def values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        return (xs - float(self.w) + float(self.z)) - self.offsets(xs)

    def derivs(self, xs, k: int = 1) -> np.ndarray:
        """Vectorized ``deriv``; right-side values use the mirror identity."""
        xs = np.asarray(xs, dtype=np.float64)
        w, N = float(self.w), self.depth
        right = xs > w
        xl = np.where(right, 2 * w - xs, xs)
        idx = np.searchsorted(self._pf, xl, side="right")
        out = np.full_like(xs, 1.0 if k == 1 else 0.0)
        glue = (idx >= 1) & ((idx <= N) | (xl == self._pf[N]))
        i = np.minimum(idx[glue], N) - 1
        u = (xl[glue] - self._pf[i]) / self._df[i]
        b = bump_values(u, k - 1)
        d = 1.0 + self._gf[i] * b if k == 1 else self._gf[i] / self._df[i] ** (k - 1) * b
        if k > 1:
            d = np.where(right[glue], (-1.0) ** (k + 1) * d, d)
        out[glue] = d
        if k == 1:
            trunc = (idx > N) & ~glue & (xl != w)
            out[trunc] = float(1 + self.residual / (self.w - self.left.p[-1]))
        return out

    # ------------------------------------------------------------ export

    def to_json(self) -> dict:
        fmt = format_rational
        return {
            "target": [fmt(self.w), fmt(self.z)],
            "depth": self.depth,
            "truncated_zone": [[fmt(a), fmt(b)] for a, b in self.truncated_zone()],
            "residual": fmt(self.residual),
            "pieces": [
                {"id": p.piece_id, "zone": p.zone_label,
                 "lo": None if p.lo is None else fmt(p.lo),
                 "hi": None if p.hi is None else fmt(p.hi),
                 "member": None if p.member is None else p.member.to_json()}
                for p in self.pieces()
            ],
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }

    def default_grid(self, count: int = 2001) -> list:
        lo = self.left.p[0] - Fraction(1, 2)
        hi = self.right.p[0] + Fraction(1, 2)
        xs = {lo + (hi - lo) * Fraction(i, count - 1) for i in range(count)}
        xs.add(self.w)
        return sorted(xs)

    def curve_csv(self, xs=None) -> str:
        """CSV text with columns x, G, G', piece id and zone."""
        xs = self.default_grid() if xs is None else xs
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["x", "G", "G_prime", "piece_id", "zone"])
        for x in xs:
            piece = self.locate(x)
            out.writerow([repr(float(x)), repr(float(self.value(x))), repr(self.deriv(x)),
                          piece.piece_id, piece.zone_label])
        return buf.getvalue()


def assemble_diffeo(target, depth: int = 20, c=1) -> DiffeoAssembly:
    return DiffeoAssembly(target, depth, c)


# ---------------------------------------------------------------- certifiers


def default_scales(G: DiffeoAssembly, at=(5, 8, 12)) -> list[Fraction]:
    return [G.left.delta[m - 1] for m in at if m <= len(G.left.delta)]


def _depth_for(G, h) -> int:
    """Smallest depth whose truncated zone ends before ``w - h``."""
    n = G.depth
    while G.left.delta[0] / 2 ** (n - 1) > h and n < 10_000:
        n += 1
    return n


def _difference(G, w, h, k: int, sign: int):
    """k-th one-sided difference quotient of G at w with step ``sign * h``."""
    step = sign * h
    coeffs = [(-1) ** (k - j) * math.comb(k, j) for j in range(k + 1)]
    if hasattr(G, "offset"):
        acc = sum(c * float(G.offset(w + j * step)) for j, c in enumerate(coeffs))
        return (1.0 if k == 1 else 0.0) - acc / float(step) ** k
    acc = sum(c * G.value(w + j * step) for j, c in enumerate(coeffs))
    return float(acc / step ** k)


def _monotone(errors: list[float]) -> bool:
    return all(b <= a for a, b in zip(errors, errors[1:])) and (errors[-1] < errors[0] or errors[0] == 0)


def certify_smooth_at_target(G, orders: int = 4, scales=None, tol_first: float = 1e-3,
                             tol_higher: float = 1e-2) -> dict:
    """One-sided difference quotients of G at the target from both sides.

    Works with any object exposing ``target`` and ``value`` (and uses the
    offset path when ``offset`` is present).  Order 1 must approach 1, higher
    orders 0, with errors non-increasing over at least three decreasing scales.
    """
    w = G.target[0]
    scales = default_scales(G) if scales is None else [Fraction(h) for h in scales]
    if len(scales) < 3 or any(b >= a for a, b in zip(scales, scales[1:])):
        raise DomainError("need at least three strictly decreasing scales")
    report = {"target": [format_rational(t) for t in G.target],
              "scales": [format_rational(h) for h in scales], "orders": orders, "checks": []}
    if hasattr(G, "in_truncated_zone"):
        hit = [h for h in scales
               if any(G.in_truncated_zone(w + sign * j * h) for j in range(1, orders + 1) for sign in (-1, 1))]
        if hit:
            report.update(status="inconclusive", suggestion={"depth": _depth_for(G, min(hit))},
                          reason=f"scale {format_rational(hit[0])} reaches the truncated zone")
            return report
    ok = True
    for k in range(1, orders + 1):
        goal, tol = (1.0, tol_first) if k == 1 else (0.0, tol_higher)
        for side, sign in (("left", -1), ("right", 1)):
            est = [_difference(G, w, h, k, sign) for h in scales]
            err = [abs(e - goal) for e in est]
            passed = _monotone(err) and err[-1] < tol
            ok &= passed
            report["checks"].append({"order": k, "side": side, "estimates": est, "errors": err,
                                     "monotone": _monotone(err), "tolerance": tol, "pass": passed})
    report["status"] = "pass" if ok else "fail"
    if hasattr(G, "depth"):
        report["truncation"] = {"depth": G.depth, "residual": float(G.residual)}
    return report


def _decreasing_from(seq: list) -> int:
    """1-based index from which ``seq`` is strictly decreasing to its end."""
    n0 = len(seq)
    while n0 > 1 and seq[n0 - 2] > seq[n0 - 1]:
        n0 -= 1
    return n0


def certify_lipschitz(G: DiffeoAssembly, K: int = 4, probes: int = 1000) -> dict:
    """Derivative bounds of every piece, their decay, and ``G' >= 1``."""
    L = G.left
    N = G.depth
    orders = []
    ok = True
    for k in range(1, K + 1):
        norm = sup_norm(k - 1).value
        if k == 1:
            bounds = [1 + float(g) * norm for g in L.gamma]
            decay = [float(g) * norm for g in L.gamma]
            trunc = float(1 + G.residual / (G.w - L.p[-1]))
            sup = max([1.0, trunc] + bounds)
        else:
            bounds = [float(g / d ** (k - 1)) * norm for g, d in zip(L.gamma, L.delta)]
            decay = bounds
            sup = max(bounds)
        n0 = _decreasing_from(decay)
        decreasing = n0 <= k + 1
        ok &= decreasing and math.isfinite(sup)
        orders.append({"order": k, "sup": sup, "norm_b": norm, "piece_bounds": bounds,
                       "decreasing_from": n0, "eventually_decreasing": decreasing})
    lo = float(L.p[0]) - 1.0
    hi = float(G.right.p[0]) + 1.0
    w = float(G.w)
    near = w + np.concatenate([-np.geomspace(1e-1, 1e-9, probes // 4), np.geomspace(1e-9, 1e-1, probes // 4)])
    xs = np.concatenate([np.linspace(lo, hi, probes - 2 * (probes // 4)), near])
    dmin = float(G.derivs(xs, 1).min())
    ok &= dmin >= 1.0
    return {"target": [format_rational(t) for t in G.target], "depth": N, "orders": orders,
            "min_first_derivative": dmin, "inverse_derivative_bound": 1.0 / dmin,
            "probes": int(xs.size), "status": "pass" if ok else "fail"}
