"""numba switch.

Set ``PHASEADJ_DISABLE_NUMBA=1`` to force the pure-numpy code paths; they are
also used automatically when numba cannot be imported.
"""
import os

_DISABLED = os.environ.get("PHASEADJ_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

try:
    if _DISABLED:
        raise ImportError
    import numba
except ImportError:  # pragma: no cover - depends on environment
    numba = None

USE_NUMBA = numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise return the function untouched."""
    if numba is not None:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
