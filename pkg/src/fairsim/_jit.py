"""Numba toggle.

Set ``FAIRSIM_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
fallback. The flag is read once at import time. ``HAS_NUMBA`` only says
whether numba can be imported, so the compiled kernels stay reachable for
parity tests and benchmarks even when disabled.
"""

import os
from warnings import warn

DISABLED = os.environ.get("FAIRSIM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba as _nb

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _nb = None
    HAS_NUMBA = False
    if not DISABLED:
        warn("numba not importable; falling back to numpy kernels")

USE_NUMBA = HAS_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return _nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def identity(fn):
        return fn

    return identity
