"""Backend switch for the compiled statevector kernels.

Set ``KAGOME_VQE_NUMBA=0`` to force the pure-numpy code path (useful for
debugging and for platforms without numba). The flag is read once, at import.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("KAGOME_VQE_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op decorator without numba."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if not NUMBA_AVAILABLE:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
