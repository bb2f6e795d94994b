"""The normalized bump ``b`` on [0, 1], its derivatives and its integral.

The shape is ``exp(-1/(4u))`` with ``u = x(1-x)``, which is the same function
as ``exp(-1/(1-(2x-1)**2))``.  Derivatives keep the closed form
``N_k(x) * u**(-m_k) * exp(-1/(4u))``; the polynomials ``N_k`` are produced
exactly over the rationals by the rule

    N_{k+1} = N_k' u^2 - m_k N_k u' u + N_k u' / 4,   m_{k+1} = m_k + 2.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import DomainError
from . import kernels

K_MAX = 6
QUAD_TOL = 1e-10
SUP_GRID = 4097

_U = (Fraction(0), Fraction(1), Fraction(-1))      # x - x^2
_DU = (Fraction(1), Fraction(-2))                   # 1 - 2x


def _padd(*polys):
    out = [Fraction(0)] * max(len(p) for p in polys)
    for p in polys:
        for i, c in enumerate(p):
            out[i] += c
    return tuple(out)


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


def _pscale(p, c):
    return tuple(c * a for a in p)


def _pderiv(p):
    return tuple(i * c for i, c in enumerate(p))[1:] or (Fraction(0),)


@lru_cache(maxsize=None)
def derivative_form(k: int) -> tuple[tuple[Fraction, ...], int]:
    """``(N_k, m_k)`` with ``d^k/dx^k exp(-1/(4u)) = N_k u^{-m_k} exp(-1/(4u))``."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k == 0:
        return (Fraction(1),), 0
    N, m = derivative_form(k - 1)
    nxt = _padd(
        _pmul(_pderiv(N), _pmul(_U, _U)),
        _pscale(_pmul(N, _pmul(_DU, _U)), Fraction(-m)),
        _pscale(_pmul(N, _DU), Fraction(1, 4)),
    )
    while len(nxt) > 1 and nxt[-1] == 0:
        nxt = nxt[:-1]
    return nxt, m + 2


def _coeffs(k: int) -> np.ndarray:
    N, _ = derivative_form(k)
    return np.array([float(c) for c in N])


def _check_order(k: int):
    if not 0 <= k <= K_MAX:
        raise DomainError(f"derivative order {k} unsupported (0 <= k <= {K_MAX})")


def shape_values(xs, k: int = 0) -> np.ndarray:
    """k-th derivative of the unnormalized shape on an array of points."""
    _check_order(k)
    return kernels.shape(np.asarray(xs, dtype=np.float64), _coeffs(k), derivative_form(k)[1])


# ---------------------------------------------------------------- integration


@dataclass(frozen=True)
class CumulativeTable:
    """Adaptive panels of [0, 1/2] with running integrals of the shape."""

    edges: np.ndarray      # panel boundaries, edges[0] = 0, edges[-1] = 1/2
    cumulative: np.ndarray  # integral of the shape over [0, edges[i]]
    error: float            # summed |Kronrod - Gauss| over all panels

    @property
    def half_integral(self) -> float:
        return float(self.cumulative[-1])


def adaptive_panels(lo: float, hi: float, tol: float, max_rounds: int = 40):
    """Bisect panels of ``[lo, hi]`` until each Gauss-Kronrod difference is
    below its share of ``tol``; returns sorted edges, Kronrod values, errors."""
    done_a, done_k, done_e = [], [], []
    a = np.linspace(lo, hi, 9)[:-1]
    b = a + (hi - lo) / 8
    for _ in range(max_rounds):
        kron, gauss = kernels.gk15(a, b)
        err = np.abs(kron - gauss)
        ok = err <= tol * (b - a) / (hi - lo)
        done_a.append(a[ok]), done_k.append(kron[ok]), done_e.append(err[ok])
        if ok.all():
            break
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    else:
        raise RuntimeError("adaptive quadrature did not converge")
    a = np.concatenate(done_a)
    order = np.argsort(a)
    return a[order], np.concatenate(done_k)[order], np.concatenate(done_e)[order]


_table_lock = threading.Lock()
_table: CumulativeTable | None = None


def cumulative_table() -> CumulativeTable:
    """Built once per process; later calls return the same immutable table."""
    global _table
    with _table_lock:
        if _table is None:
            starts, kron, err = adaptive_panels(0.0, 0.5, 1e-15)
            edges = np.append(starts, 0.5)
            cumulative = np.concatenate([[0.0], np.cumsum(kron)])
            _table = CumulativeTable(edges, cumulative, float(err.sum()))
        return _table


@dataclass(frozen=True)
class Normalization:
    Z: float
    error: float


def normalization() -> Normalization:
    """``Z`` = integral of the shape over [0, 1] (twice the half integral)."""
    t = cumulative_table()
    return Normalization(2.0 * t.half_integral, 2.0 * t.error)


def _shape_integral_from_zero(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integral of the shape over [0, s] for s in [0, 1/2], with error estimates."""
    t = cumulative_table()
    j = np.clip(np.searchsorted(t.edges, s, side="right") - 1, 0, len(t.edges) - 2)
    start = t.edges[j]
    kron, gauss = kernels.gk15(start, s)
    return t.cumulative[j] + kron, np.abs(kron - gauss) + t.error


def bump_integral(s, with_error: bool = False):
    """``B(s)``: integral of b over [0, s], using ``B(s) = 1 - B(1-s)`` past 1/2."""
    arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    if np.any((arr < 0) | (arr > 1)):
        raise DomainError("bump integral is defined on [0, 1]")
    Z = normalization().Z
    lower = arr <= 0.5
    val = np.empty_like(arr)
    err = np.empty_like(arr)
    v, e = _shape_integral_from_zero(arr[lower])
    val[lower], err[lower] = v / Z, e / Z
    v, e = _shape_integral_from_zero(1.0 - arr[~lower])
    val[~lower], err[~lower] = 1.0 - v / Z, e / Z
    if np.ndim(s) == 0:
        val, err = float(val[0]), float(err[0])
    return (val, err) if with_error else val


def bump_tail(s):
    """``1 - B(s)`` without cancellation: equals ``B(1 - s)`` by symmetry."""
    return bump_integral(1.0 - np.asarray(s, dtype=np.float64))


# ---------------------------------------------------------------- evaluation


def _as_unit(x) -> float:
    if not 0 <= x <= 1:
        raise DomainError(f"{x} lies outside [0, 1]")
    return float(x)


def bump_eval(x) -> float:
    v = _as_unit(x)
    if v in (0.0, 1.0):
        return 0.0
    return float(shape_values(np.array([v]))[0]) / normalization().Z


def bump_deriv(x, k: int) -> float:
    """k-th derivative of b; exactly 0 at both endpoints for every order."""
    _check_order(k)
    v = _as_unit(x)
    if v in (0.0, 1.0):
        return 0.0
    return float(shape_values(np.array([v]), k)[0]) / normalization().Z


def bump_values(xs, k: int = 0) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if np.any((xs < 0) | (xs > 1)):
        raise DomainError("bump is defined on [0, 1]")
    return shape_values(xs, k) / normalization().Z


@dataclass(frozen=True)
class SupNorm:
    order: int
    value: float
    argmax: float
    grid: int


@lru_cache(maxsize=None)
def sup_norm(k: int, grid: int = SUP_GRID) -> SupNorm:
    """``max |b^(k)|`` by a uniform grid scan refined with bounded Brent search."""
    _check_order(k)
    xs = np.linspace(0.0, 1.0, grid)
    vals = np.abs(bump_values(xs, k))
    i = int(np.argmax(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    res = minimize_scalar(
        lambda x: -abs(bump_values(np.array([x]), k)[0]),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-12},
    )
    best, where = (vals[i], xs[i]) if vals[i] >= -res.fun else (-res.fun, res.x)
    return SupNorm(k, float(best), float(where), grid)
