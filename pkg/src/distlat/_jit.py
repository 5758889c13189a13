"""Optional numba acceleration.

Set ``DISTLAT_DISABLE_NUMBA=1`` before import to run every kernel as plain
Python/NumPy.  Both paths share one source so results are identical.
"""

import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _numba_enabled():
    if os.environ.get("DISTLAT_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


HAVE_NUMBA = _numba_enabled()

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit

__all__ = ["HAVE_NUMBA", "njit"]
