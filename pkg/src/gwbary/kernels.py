"""Kernel backend selection.

The compiled extension is used when it was built and ``GWBARY_PURE_PYTHON`` is
unset; otherwise the pure-Python kernels are used. Both expose the same
functions and produce identical results.
"""
import os

from . import _kernels_py

OPTIMAL = _kernels_py.OPTIMAL
ITERATION_LIMIT = _kernels_py.ITERATION_LIMIT

_ckernels = None
if not os.environ.get("GWBARY_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        _ckernels = None

_active = _ckernels if _ckernels is not None else _kernels_py
BACKEND = "compiled" if _ckernels is not None else "python"


def available_backends():
    return ["compiled", "python"] if _ckernels is not None else ["python"]


def get_backend(name=None):
    """Kernel module for ``name`` (``"compiled"`` or ``"python"``), default the active one."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def transport_simplex(cost, supply, demand, max_iter=100000, tol=1e-11):
    return _active.transport_simplex(cost, supply, demand, max_iter, tol)


def lattice_min_cost(weights, row_caps, col_caps):
    return _active.lattice_min_cost(weights, row_caps, col_caps)
