"""Backend selection for the hot kernels.

Set ``GAUSSIAN_TOURNAMENT_NO_NUMBA=1`` (any non-empty value other than ``0``)
to force the pure-numpy implementations.  numba is optional; when it cannot be
imported the numpy path is used silently.
"""
import os

ENV_FLAG = "GAUSSIAN_TOURNAMENT_NO_NUMBA"


def _flag_set():
    value = os.environ.get(ENV_FLAG, "").strip().lower()
    return value not in ("", "0", "false", "no")


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is pre-installed here
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_set()


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        import numba

        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
