"""Optional numba acceleration.

Hot loops are written once as plain Python and compiled with ``numba.njit``
when numba is importable.  Setting ``FIELDLAB_DISABLE_NUMBA=1`` in the
environment (before import) forces the pure-numpy fallback path instead.
"""
import os

_DISABLED = os.environ.get("FIELDLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("disabled by FIELDLAB_DISABLE_NUMBA")
    import numba as _nb
    HAVE_NUMBA = True
except ImportError:
    _nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged."""
    if not USE_NUMBA:
        return func
    return _nb.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
