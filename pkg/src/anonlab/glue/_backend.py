"""Backend switch for the float kernels.

``LAB_NUMBA=0`` forces the pure-numpy path; otherwise numba is used when it
imports.  The choice is made once, at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("LAB_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def njit(fn):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if not NUMBA_AVAILABLE:
        return fn
    return numba.njit(fn)
