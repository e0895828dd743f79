"""Select the compiled ascent kernel, falling back to numpy.

Set ``TERPGEOM_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("TERPGEOM_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def get(name: str | None = None):
    """Kernel module by name (``"cython"``, ``"python"`` or default)."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
