"""Kernel backend selection.

Hot numeric kernels are written once in numba-compatible numpy style and
compiled with ``@numba.njit`` when the numba backend is active.  Setting the
environment variable ``TVERBERG_LAB_BACKEND=numpy`` before import selects the
pure-numpy interpretation of the same code (useful for debugging and for the
backend-comparison benchmark).  Default is numba when importable.
"""

import os

_ENV_VAR = "TVERBERG_LAB_BACKEND"
_VALID = ("numba", "numpy")


def _resolve_backend() -> str:
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested and requested not in _VALID:
        raise ValueError(
            f"{_ENV_VAR} must be one of {_VALID}, got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return BACKEND


def jit(func):
    """Compile ``func`` with numba when active, else return it unchanged."""
    if BACKEND == "numba":
        from numba import njit

        return njit(cache=True, nogil=True)(func)
    return func
