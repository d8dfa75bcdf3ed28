"""Optional numba acceleration.

Kernels are written in nopython-compatible style; when numba is missing
(or SAWLAB_NO_NUMBA is set) they run as plain Python, slower but identical.
"""
import os

HAVE_NUMBA = False

if not os.environ.get("SAWLAB_NO_NUMBA"):
    try:
        from numba import njit as _njit

        HAVE_NUMBA = True
    except ImportError:
        pass

if HAVE_NUMBA:

    def maybe_njit(**kwargs):
        kwargs.setdefault("cache", True)
        return _njit(**kwargs)

else:

    def maybe_njit(**kwargs):
        def decorate(func):
            return func

        return decorate
