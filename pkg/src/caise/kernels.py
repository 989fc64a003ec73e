"""Kernel selection: compiled extension when available, pure Python otherwise.

Set CAISE_PURE_KERNELS=1 to force the fallback (used by the parity tests and
the benchmark).
"""

from __future__ import annotations

import os

from . import _purekernels

if os.environ.get("CAISE_PURE_KERNELS") == "1":
    _impl = _purekernels
else:
    try:
        from . import _fastkernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _purekernels

IMPL = _impl.IMPL
rotate_pixels = _impl.rotate_pixels
cutout_scores = _impl.cutout_scores
largest_component_mask = _impl.largest_component_mask
apply_mask = _impl.apply_mask
