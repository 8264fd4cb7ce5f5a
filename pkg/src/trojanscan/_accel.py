"""JIT selection for the numeric kernels.

Kernels are written once in the numba-compatible subset of Python. When numba
is importable and ``TROJANSCAN_DISABLE_JIT`` is unset (or ``0``), they are
compiled with ``@njit``; otherwise the plain Python function is used as is.
"""

import os

JIT_DISABLED = os.environ.get("TROJANSCAN_DISABLE_JIT", "").strip() not in ("", "0")

try:
    if JIT_DISABLED:
        raise ImportError
    import numba
except ImportError:  # pragma: no cover - exercised via the env flag in CI
    numba = None

JIT_ENABLED = numba is not None


def kernel(fn):
    """Compile ``fn`` with numba if enabled; keep the Python original as ``.py_func``."""
    if numba is None:
        fn.py_func = fn
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend() -> str:
    return f"numba {numba.__version__}" if numba is not None else "python"
