"""Optional numba acceleration for the hot kernels.

Every kernel in :mod:`phantomeym.kernels` is written in the numpy subset that
numba understands, so the same source runs either compiled or as plain numpy.
Set ``PHANTOMEYM_DISABLE_NUMBA=1`` to force the numpy path (numba missing has
the same effect).
"""

import os

ENV_FLAG = "PHANTOMEYM_DISABLE_NUMBA"

_disabled = os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")

numba = None
if not _disabled:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None

NUMBA_ENABLED = numba is not None
BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def jit(fn):
    """Compile ``fn`` with ``numba.njit`` when the numba backend is active."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
