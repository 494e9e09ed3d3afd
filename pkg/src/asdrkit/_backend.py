"""Kernel backend selection.

Hot inner loops (edit-distance DP, alignment backtrace, assignment,
median filtering, hysteresis, PRNG stream generation) exist twice: a
numba ``@njit`` version and a pure-numpy/Python version.  The active
backend is chosen once at import time:

* ``ASDRKIT_BACKEND=numba``  force the JIT kernels (error if numba is
  not importable),
* ``ASDRKIT_BACKEND=numpy``  force the fallback kernels,
* unset                      numba when importable, fallback otherwise.

Both backends produce identical results; ``benchmarks/bench_kernels.py``
compares their speed.
"""

from __future__ import annotations

import os
import warnings

_VALID = ("numba", "numpy")


def _detect() -> str:
    choice = os.environ.get("ASDRKIT_BACKEND", "").strip().lower()
    if choice and choice not in _VALID:
        raise ValueError(
            f"ASDRKIT_BACKEND={choice!r}: expected one of {_VALID}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        warnings.warn("numba not importable; falling back to numpy kernels")
        return "numpy"
    return "numba"


BACKEND: str = _detect()
USE_NUMBA: bool = BACKEND == "numba"


def jit(func):
    """Apply ``numba.njit(cache=True)`` when the numba backend is active."""
    if USE_NUMBA:
        from numba import njit

        return njit(cache=True)(func)
    return func
