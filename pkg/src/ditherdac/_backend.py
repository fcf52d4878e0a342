"""Kernel backend selection.

Hot loops are compiled with numba when it is importable. ``DITHERDAC_BACKEND``
picks the default path (``numba`` or ``numpy``); both stay callable in the
same process so they can be compared directly.
"""
import os

BACKEND_ENV = "DITHERDAC_BACKEND"
BACKENDS = ("numba", "numpy")

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False


def _default_backend():
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if requested not in BACKENDS:
        raise ValueError(f"{BACKEND_ENV} must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not NUMBA_AVAILABLE:
        return "numpy"
    return requested


BACKEND = _default_backend()


def jit(func):
    """Compile ``func`` in nopython mode, or return None without numba."""
    if not NUMBA_AVAILABLE:
        return None
    return numba.njit(nogil=True, cache=True)(func)


def resolve(backend=None):
    backend = BACKEND if backend is None else backend
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend
