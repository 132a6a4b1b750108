"""JIT selection for the hot kernels.

Kernels are written once, using scalar loops and numpy slice arithmetic that
numba and plain numpy both understand. Setting ``NHWISHART_DISABLE_JIT=1``
(or running without numba installed) leaves them as ordinary Python/numpy
functions, which is the reference path the benchmarks compare against.
"""

import os
from typing import Any, Callable

JIT_DISABLED = os.environ.get("NHWISHART_DISABLE_JIT", "").strip() not in ("", "0")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None and not JIT_DISABLED


def njit(*args: Any, **kwargs: Any) -> Callable:
    """``numba.njit`` with ``cache=True, nogil=True`` defaults, or a no-op."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return _numba.njit(*args, **kwargs)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
