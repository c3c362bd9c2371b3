"""Kernel backend selection.

The compiled extension is used when it imported cleanly, the numpy
implementation otherwise. UAVEDGE_KERNEL=c or UAVEDGE_KERNEL=numpy forces
the choice (forcing c raises if the extension is missing). Both backends
implement the same four functions with the same semantics; floating-point
results can differ in the last bits because numpy's matmul sums in a
different order, so reproducibility guarantees hold per backend.
"""

from __future__ import annotations

import os

from . import numpy_backend

try:
    from . import _cykernels
except ImportError:
    _cykernels = None


def available_backends() -> tuple[str, ...]:
    return ("numpy",) if _cykernels is None else ("c", "numpy")


def get_backend(name: str | None = None):
    """Resolve a backend module by name, or pick the default."""
    if name is None:
        name = os.environ.get("UAVEDGE_KERNEL", "").strip().lower() or None
    if name in (None, "auto"):
        return _cykernels if _cykernels is not None else numpy_backend
    if name in ("numpy", "py", "python"):
        return numpy_backend
    if name in ("c", "cython", "compiled"):
        if _cykernels is None:
            raise ImportError("compiled kernel requested via UAVEDGE_KERNEL but the "
                              "extension is not built; reinstall or set UAVEDGE_KERNEL=numpy")
        return _cykernels
    raise ValueError(f"unknown kernel backend {name!r}; choose from c, numpy")


def backend_name(backend=None) -> str:
    return (backend or get_backend()).NAME
