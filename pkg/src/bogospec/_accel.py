"""Optional numba acceleration.

Hot loops are written once as plain Python over numpy arrays and compiled
with ``numba.njit`` when it is importable.  Setting ``BOGOSPEC_NO_NUMBA=1``
in the environment disables compilation; callers then dispatch to the
vectorized numpy/scipy implementations that live next to each kernel.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSY


try:  # pragma: no cover - exercised implicitly by either branch
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _env_flag("BOGOSPEC_NO_NUMBA")


def njit(func=None, **kwargs):
    """Compile with ``numba.njit(cache=True)`` when numba is available.

    Without numba the function is returned unchanged, so the decorated
    code still runs (slowly) as ordinary Python.
    """

    def wrap(f):
        if _numba is None:
            return f
        opts = {"cache": True}
        opts.update(kwargs)
        return _numba.njit(**opts)(f)

    if func is not None:
        return wrap(func)
    return wrap


def backend() -> str:
    """Name of the active backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n: int | None) -> None:
    """Cap numba and BLAS thread pools at ``n`` (no-op for ``None``)."""
    if n is None:
        return
    n = max(1, int(n))
    if _numba is not None:
        import warnings

        try:
            with warnings.catch_warnings():
                # threading-layer probing may warn about an old TBB
                warnings.filterwarnings("ignore", message=".*TBB.*")
                _numba.set_num_threads(min(n, _numba.config.NUMBA_NUM_THREADS))
        except (ValueError, AttributeError):
            pass
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(n)
    except ImportError:
        pass
