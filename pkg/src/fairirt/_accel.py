"""Backend selection for the hot kernels.

Numba is used when importable unless ``FAIRIRT_DISABLE_NUMBA`` is set to a
truthy value, in which case the pure-numpy kernels are used instead. The flag
is read once at import time.
"""
import os

_FLAG = os.environ.get("FAIRIRT_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by FAIRIRT_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # Bare ``@njit`` and ``@njit(cache=True)`` both become no-ops.
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"
