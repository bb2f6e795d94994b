"""Float kernels for the bump shape and 15-point Gauss-Kronrod panels.

Every kernel exists twice: a vectorized numpy version and a loop version
compiled with numba.  ``ACTIVE`` names the one selected by the backend
switch; both stay importable so the benchmark and the tests can compare them.

The integrand family is ``N(x) * u**(-m) * exp(-1/(4u))`` with ``u = x(1-x)``
and ``N`` a polynomial given by ascending float coefficients.  ``m = 0`` and
``N = 1`` is the bare bump shape.
"""
import numpy as np

from ._backend import USE_NUMBA, njit

# QUADPACK qk15 abscissae and weights on [-1, 1]; Gauss points are xgk[1::2]
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point node/weight vectors, used by the numpy path
_NODES = np.concatenate([-XGK[:-1], XGK[::-1]])
_WK = np.concatenate([WGK[:-1], WGK[::-1]])
_WG = np.zeros(15)
for _i, _w in zip((1, 3, 5), WG[:3]):
    _WG[_i] = _WG[14 - _i] = _w
_WG[7] = WG[3]

ONE = np.ones(1)


# ---------------------------------------------------------------- numpy path


def np_shape(x, coeffs=ONE, m=0):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < 1.0)
    xi = x[inside]
    u = xi * (1.0 - xi)
    poly = np.polynomial.polynomial.polyval(xi, coeffs)
    with np.errstate(over="ignore", divide="ignore"):  # subnormal u: the exponential is 0
        out[inside] = poly * np.exp(-0.25 / u - m * np.log(u))
    return out


def np_gk15(a, b, coeffs=ONE, m=0):
    """Kronrod and Gauss estimates on each panel ``[a_i, b_i]``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np_shape(mid[:, None] + half[:, None] * _NODES[None, :], coeffs, m)
    return half * (fx @ _WK), half * (fx @ _WG)


# ---------------------------------------------------------------- numba path


@njit
def _shape_point(x, coeffs, m):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    u = x * (1.0 - x)
    poly = 0.0
    for j in range(coeffs.shape[0] - 1, -1, -1):
        poly = poly * x + coeffs[j]
    return poly * np.exp(-0.25 / u - m * np.log(u))


@njit
def _nb_shape(x, coeffs, m):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _shape_point(x[i], coeffs, m)
    return out


@njit
def _nb_gk15(a, b, coeffs, m, xgk, wgk, wg):
    n = a.shape[0]
    kron = np.empty(n)
    gauss = np.empty(n)
    for i in range(n):
        half = 0.5 * (b[i] - a[i])
        mid = 0.5 * (a[i] + b[i])
        fc = _shape_point(mid, coeffs, m)
        rk = fc * wgk[7]
        rg = fc * wg[3]
        for j in range(7):
            dx = half * xgk[j]
            s = _shape_point(mid - dx, coeffs, m) + _shape_point(mid + dx, coeffs, m)
            rk += wgk[j] * s
            if j % 2 == 1:
                rg += wg[j // 2] * s
        kron[i] = half * rk
        gauss[i] = half * rg
    return kron, gauss


def nb_shape(x, coeffs=ONE, m=0):
    x = np.ascontiguousarray(x, dtype=np.float64)
    flat = _nb_shape(x.ravel(), np.asarray(coeffs, dtype=np.float64), float(m))
    return flat.reshape(x.shape)


def nb_gk15(a, b, coeffs=ONE, m=0):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    return _nb_gk15(a, b, np.asarray(coeffs, dtype=np.float64), float(m), XGK, WGK, WG)


IMPLEMENTATIONS = {
    "numpy": (np_shape, np_gk15),
    "numba": (nb_shape, nb_gk15),
}
ACTIVE = "numba" if USE_NUMBA else "numpy"
shape, gk15 = IMPLEMENTATIONS[ACTIVE]
