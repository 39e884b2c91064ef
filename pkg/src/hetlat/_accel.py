"""Numba switch.

Set ``HETLAT_DISABLE_NUMBA=1`` to force the pure-numpy kernels (useful for
debugging and for environments without a working LLVM).  Numba's own
``NUMBA_DISABLE_JIT`` is honoured as well.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in _FALSY


USE_NUMBA = not (_flag("HETLAT_DISABLE_NUMBA") or _flag("NUMBA_DISABLE_JIT"))

if USE_NUMBA:
    try:
        import numba

        njit = numba.njit(cache=True, nogil=True)
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(func):
        return func
