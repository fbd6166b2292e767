"""JIT selection for the numeric kernels.

Hot loops in :mod:`cdbeam._kernels` are written as plain Python over numpy
arrays and compiled with numba when it is available.  Setting the environment
variable ``CDBEAM_DISABLE_JIT=1`` (or running without numba installed) selects
the interpreted pure-numpy path; results are identical, only slower.  The
``benchmarks/bench_kernels.py`` script times both paths.
"""

import os

DISABLE_JIT = os.environ.get("CDBEAM_DISABLE_JIT", "").strip().lower() in (
    "1", "true", "yes", "on",
)

try:
    if DISABLE_JIT:
        raise ImportError("jit disabled by CDBEAM_DISABLE_JIT")
    from numba import njit as _numba_njit
    HAVE_NUMBA = True

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return _numba_njit(*args, **kwargs)

except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap

JIT_ENABLED = HAVE_NUMBA and not DISABLE_JIT
