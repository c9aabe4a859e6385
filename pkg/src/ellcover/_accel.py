"""JIT switch for the numeric kernels.

Kernels are written in the subset of Python/numpy that numba compiles. Setting
``ELLCOVER_DISABLE_NUMBA=1`` (or running without numba installed) leaves them as
ordinary Python functions operating on numpy arrays, which is slower but gives
identical results.
"""
import os

_FLAG = "ELLCOVER_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get(_FLAG, "").strip().lower() not in {
    "1",
    "true",
    "yes",
    "on",
}


def njit(func=None, **options):
    """``numba.njit`` with package defaults, or a no-op when JIT is disabled."""

    def wrap(f):
        if not NUMBA_ENABLED:
            return f
        options.setdefault("cache", True)
        options.setdefault("nogil", True)
        return numba.njit(**options)(f)

    if func is None:
        return wrap
    return wrap(func)


def python_version(kernel):
    """Return the uncompiled Python function behind ``kernel``."""
    return getattr(kernel, "py_func", kernel)
