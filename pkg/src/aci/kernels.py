"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``ACI_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy reference implementation is used.
"""
import os

from . import _kernels_py

_force_py = os.environ.get("ACI_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

descend_batch = _impl.descend_batch
grid_search = _impl.grid_search
compositions = _kernels_py.compositions
stationarity_gap = _kernels_py.stationarity_gap


def backends() -> dict:
    """Every importable backend, keyed by name (used by tests and the benchmark)."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
