"""Finite-difference verification of reverse-mode gradients.

Central differences with step 1e-5 against the analytic gradient, reported as
relative error per parameter block.  For large blocks a deterministic sample
of coordinates is checked; small blocks are checked exhaustively.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteLossError
from .autodiff import Tensor
from .optim import zero_grads

# Central-difference step. 1e-4 balances truncation (O(step^2)) against
# float64 cancellation: two loss evaluations of magnitude ~L carry ~1e-16*L
# noise each, so the quotient noise is ~1e-12*L — small against the 1e-6
# relative-error floor even for near-zero gradient coordinates.
STEP = 1e-4


def _loss_value(loss_fn) -> float:
    out = loss_fn()
    val = float(out.value)
    if not math.isfinite(val):
        raise NonFiniteLossError(f"loss is {val}")
    return val


def grad_check(loss_fn, params: dict[str, Tensor], max_coords_per_block: int = 16,
               seed: int = 0) -> dict[str, float]:
    """Relative error per parameter block between analytic and numeric grads.

    loss_fn: nullary callable re-running the forward pass over `params` and
    returning the scalar loss Tensor.  It must be deterministic (no dropout).
    """
    zero_grads(params)
    loss = loss_fn()
    if not math.isfinite(float(loss.value)):
        raise NonFiniteLossError(f"loss is {float(loss.value)}")
    loss.backward()
    analytic = {
        k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.value))
        for k, p in params.items()
    }

    rng = np.random.default_rng(seed)
    report: dict[str, float] = {}
    for name, p in params.items():
        flat = p.value.reshape(-1)
        n = flat.size
        if n <= max_coords_per_block:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=max_coords_per_block, replace=False)
        worst = 0.0
        for c in coords:
            keep = flat[c]
            flat[c] = keep + STEP
            up = _loss_value(loss_fn)
            flat[c] = keep - STEP
            down = _loss_value(loss_fn)
            flat[c] = keep
            numeric = (up - down) / (2.0 * STEP)
            a = analytic[name].reshape(-1)[c]
            denom = max(abs(numeric), abs(a), 1e-6)
            worst = max(worst, abs(numeric - a) / denom)
        report[name] = worst
    return report


def max_error(report: dict[str, float]) -> float:
    return max(report.values()) if report else 0.0
