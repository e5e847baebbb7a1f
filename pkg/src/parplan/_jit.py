"""Optional numba acceleration.

Set PARPLAN_NO_JIT=1 to run the engine kernels as plain Python over the
same numpy arrays (slow, but handy for debugging and for checking that both
paths agree).  When numba is not importable the fallback is used as well.
"""

import os

_off = os.environ.get("PARPLAN_NO_JIT", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _off:
        raise ImportError("disabled by PARPLAN_NO_JIT")
    import numba
except ImportError:
    numba = None

JIT_ENABLED = numba is not None


def jit(fn):
    """njit with on-disk caching, or the identity when numba is off."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
