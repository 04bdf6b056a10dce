"""Backend selection for the hot kernels.

Set ``SIGNWAVE_DISABLE_JIT=1`` before import to force the pure-numpy path
even when numba is installed.
"""
import os

_FLAG = os.environ.get("SIGNWAVE_DISABLE_JIT", "").strip().lower()
JIT_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not JIT_DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """Compile ``func`` with numba in nopython mode, caching to disk."""
    if not NUMBA_AVAILABLE:
        raise ImportError("numba is not installed")
    return numba.njit(cache=True, nogil=True)(func)
