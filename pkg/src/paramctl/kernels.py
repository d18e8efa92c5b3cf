"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the
numpy fallback is loaded.  Set ``PARAMCTL_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load() -> ModuleType:
    if os.environ.get("PARAMCTL_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py
    return _kernels


backend: ModuleType = _load()
BACKEND: str = backend.BACKEND

ks_stat_int = backend.ks_stat_int
ks_sf = backend.ks_sf
ks_sf_exact = backend.ks_sf_exact
ks_sf_asymptotic = backend.ks_sf_asymptotic
best_ks_split = backend.best_ks_split
best_entropy_split = backend.best_entropy_split

__all__ = [
    "BACKEND",
    "backend",
    "ks_stat_int",
    "ks_sf",
    "ks_sf_exact",
    "ks_sf_asymptotic",
    "best_ks_split",
    "best_entropy_split",
]
