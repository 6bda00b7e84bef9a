"""Optional numba acceleration.

Set ``TRANSLINEAR_NO_NUMBA=1`` to force the pure-numpy kernels, e.g. for
debugging or when comparing the two paths in ``benchmarks/``.
"""
import functools
import os

_FLAG = "TRANSLINEAR_NO_NUMBA"

try:
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False


def numba_disabled():
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not numba_disabled()

if HAVE_NUMBA:
    njit = functools.partial(nb.njit, cache=True, nogil=True)
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def deco(fn):
            return fn
        return deco
