"""Optional numba acceleration.

Kernels are written so the exact same code runs compiled or interpreted;
both paths consume the supplied ``numpy.random.Generator`` in the same
order, so toggling the backend does not change the draw stream.
Set TVPSPARSE_DISABLE_NUMBA=1 to force the interpreted path.
"""

import os

_DISABLED = os.environ.get("TVPSPARSE_DISABLE_NUMBA", "") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
