"""Pick the compiled kernels when available, numpy otherwise.

Set ``BMLAB_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by the backend-agreement tests).
"""
import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if not os.environ.get("BMLAB_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def use(name):
    """Switch the active backend at runtime ("cython" or "python")."""
    global kernels, BACKEND
    if name == "python":
        kernels, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels as _compiled

        kernels, BACKEND = _compiled, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
