"""Finite-difference verification of reverse-mode gradients.

Central differences with step 1e-6 on sampled coordinates of every
parameter; coordinates whose perturbation lands within 1e-6 of a relu kink
are reported as skipped rather than failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import NumericInputError
from . import functional
from .rng import Rng
from .tensor import Parameter, Tensor, no_grad

FD_STEP = 1e-6
KINK_TOL = 1e-6
# Central differences carry ~eps*|f|/step of rounding noise; differences
# below this floor are agreement, not error (matters when the true
# gradient is exactly 0, e.g. parameters softmax is invariant to).
FD_NOISE_FLOOR = 1e-8


@dataclass
class ParamReport:
    name: str
    max_rel_error: float
    n_checked: int
    skipped: list[int] = field(default_factory=list)


def _loss_value(forward: Callable[[], Tensor]) -> tuple[float, bool]:
    """Forward under no_grad; returns (loss, hit_kink)."""
    functional._kink_tracker = tracker = []
    try:
        with no_grad():
            value = float(forward().data)
    finally:
        functional._kink_tracker = None
    hit_kink = any(m <= KINK_TOL for m in tracker)
    return value, hit_kink


def grad_check(forward: Callable[[], Tensor], params: Sequence[Parameter],
               n_coords: int = 20, step: float = FD_STEP,
               seed: int = 0, noise_floor: float = FD_NOISE_FLOOR) -> list[ParamReport]:
    """Compare analytic gradients of the scalar `forward()` against central
    finite differences on up to `n_coords` random coordinates per parameter.

    Relative error per coordinate: |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-12),
    with absolute differences below `noise_floor` counted as exact agreement.
    """
    for p in params:
        p.zero_grad()
    loss = forward()
    if loss.size != 1:
        raise NumericInputError("grad_check: forward() must return a scalar loss")
    if not np.isfinite(loss.data):
        raise NumericInputError("grad_check: non-finite loss")
    loss.backward()

    rng = Rng(seed)
    reports = []
    for p in params:
        g_ad = p.grad if p.grad is not None else np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        n = min(n_coords, flat.size)
        coords = rng.choice(flat.size, size=n, replace=False)
        max_err = 0.0
        skipped: list[int] = []
        for c in np.sort(coords):
            orig = flat[c]
            flat[c] = orig + step
            f_plus, kink_p = _loss_value(forward)
            flat[c] = orig - step
            f_minus, kink_m = _loss_value(forward)
            flat[c] = orig
            if kink_p or kink_m:
                skipped.append(int(c))
                continue
            g_fd = (f_plus - f_minus) / (2.0 * step)
            g = g_ad.reshape(-1)[c]
            if abs(g - g_fd) <= noise_floor:
                continue
            err = abs(g - g_fd) / max(abs(g), abs(g_fd), 1e-12)
            max_err = max(max_err, err)
        reports.append(ParamReport(p.name, max_err, n - len(skipped), skipped))
    return reports


def max_error(reports: list[ParamReport]) -> float:
    return max((r.max_rel_error for r in reports), default=0.0)
