"""Compile switch for the numeric kernels.

Kernels are plain Python over numpy arrays. When numba is importable and
``PARITY_SAMPLER_DISABLE_JIT`` is unset (or ``0``), they are wrapped in
``numba.njit``; otherwise they run as ordinary interpreted code.
"""
import os

_FLAG = os.environ.get("PARITY_SAMPLER_DISABLE_JIT", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_ENABLED = numba is not None and not DISABLED_BY_ENV


def njit(fn):
    if not JIT_ENABLED:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if JIT_ENABLED else "python"
