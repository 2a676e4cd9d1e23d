"""Backend selection: numba-jitted kernels with a pure-numpy fallback.

The choice is made once at import time.  Set SCHROFLAT_DISABLE_NUMBA=1 to
force the numpy path; this is the reference implementation the jitted one
is benchmarked and tested against.
"""
import os

_disabled = os.environ.get("SCHROFLAT_DISABLE_NUMBA", "").strip() not in ("", "0")

try:
    if _disabled:
        raise ImportError("numba disabled by environment flag")
    from numba import njit

    HAS_NUMBA = True
except ImportError:

    def njit(*args, **kwargs):
        # decorator shim: pass functions through untouched
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap

    HAS_NUMBA = False
