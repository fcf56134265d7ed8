"""Backend selection for hot kernels.

The compiled extension is used when it imports; set ``PRUNEPRICE_PURE=1`` to
force the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PRUNEPRICE_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

mc_accept_counts = _impl.mc_accept_counts

__all__ = ["BACKEND", "mc_accept_counts"]
