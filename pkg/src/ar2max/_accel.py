"""Optional numba acceleration.

Hot loops are written once as plain Python over numpy arrays and compiled with
``numba.njit`` when numba is importable. Setting ``AR2MAX_DISABLE_NUMBA=1`` in
the environment forces the vectorised numpy fallbacks everywhere.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("AR2MAX_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

NUMBA_AVAILABLE = numba is not None
_enabled = NUMBA_AVAILABLE and not _DISABLED


def numba_enabled():
    return _enabled


def set_numba(flag):
    """Switch the compiled path on or off at runtime (benchmarks, tests).

    Returns the previous setting.
    """
    global _enabled
    previous = _enabled
    _enabled = bool(flag) and NUMBA_AVAILABLE
    return previous


def njit(*args, **kwargs):
    """``numba.njit`` if numba is installed, identity decorator otherwise."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return numba.njit(*args, **kwargs)
