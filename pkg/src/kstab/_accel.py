"""Backend selection for the numeric kernels.

Set ``KSTAB_NO_NUMBA=1`` in the environment to force the pure-numpy path.
The flag is read once at import time.
"""
import os

_FLAG = os.environ.get("KSTAB_NO_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """``numba.njit`` with on-disk caching, or the identity when numba is absent."""
    if numba is None:  # pragma: no cover
        return func
    return numba.njit(cache=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
