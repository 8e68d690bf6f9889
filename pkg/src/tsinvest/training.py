"""Binary cross-entropy objective, Adam-style optimizer, the training loop
with validation-AUC model selection, and the step-time benchmark."""

from __future__ import annotations

import copy
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateBatchError, DivergenceError,
                     NumericInputError)
from .evaluation import auc_roc
from .numerics import Rng, Tensor, no_grad
from .numerics.tensor import Parameter

log = logging.getLogger(__name__)

PROB_CLAMP = 1e-12


@dataclass
class TrainConfig:
    batch_size: int = 512
    max_epochs: int = 100
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    patience: int = 10
    seed: int = 0
    task: str = "vc"
    pos_weight: float = 1.0   # optional positive-class weight; 1.0 = off

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)
    val_auc: list[float] = field(default_factory=list)
    selected_epoch: int = -1
    seconds_per_step: float = 0.0
    stopped_early: bool = False

    def to_json(self) -> dict:
        return dict(self.__dict__)


def bce_loss(y_hat: Tensor, y: np.ndarray, pos_weight: float = 1.0) -> Tensor:
    """Mean binary cross-entropy on the class-1 probability column.

    Equals two-class softmax cross-entropy with one-hot targets since the
    rows of y_hat sum to 1. Probabilities are clamped to
    [PROB_CLAMP, 1-PROB_CLAMP] to stay finite at saturation.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise DegenerateBatchError("bce_loss: empty batch")
    p1 = y_hat[:, 1]
    # clamp without breaking the graph: gradient passes where unclamped
    inside = (p1.data > PROB_CLAMP) & (p1.data < 1.0 - PROB_CLAMP)
    p1 = p1 * Tensor(inside.astype(np.float64)) \
        + Tensor(np.where(inside, 0.0, np.clip(p1.data, PROB_CLAMP, 1 - PROB_CLAMP)))
    weights = np.where(y == 1, pos_weight, 1.0)
    terms = Tensor(y * weights) * p1.log() \
        + Tensor((1.0 - y) * weights) * (1.0 - p1).log()
    loss = -terms.sum() * (1.0 / y.size)
    # compensated summation makes the reported loss invariant to batch
    # duplication and summation order; the gradient path is unaffected
    loss.data = np.asarray(-math.fsum(terms.data.ravel()) / y.size)
    return loss


class Adam:
    """Adaptive-moment estimation with bias correction."""

    def __init__(self, params: list[Parameter], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            m_hat = self.m[i] / (1 - b1 ** self.t)
            v_hat = self.v[i] / (1 - b2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


def panels_to_arrays(panels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.stack([p.x for p in panels])
    mask = np.stack([p.step_mask for p in panels])
    y = np.array([p.y for p in panels], dtype=np.int64)
    return x, mask, y


def predict_scores(model, x: np.ndarray, mask: np.ndarray,
                   batch_size: int = 512) -> np.ndarray:
    """Eval-mode class-1 probabilities, batched."""
    scores = []
    with no_grad():
        for lo in range(0, len(x), batch_size):
            y_hat = model.forward(x[lo:lo + batch_size], mask[lo:lo + batch_size],
                                  mode="eval")
            scores.append(y_hat.data[:, 1])
    return np.concatenate(scores) if scores else np.empty(0)


def _snapshot(model) -> dict:
    return {"params": {k: p.data.copy() for k, p in model.params.items()},
            "buffers": copy.deepcopy(model.buffers())}


def _restore(model, snap: dict) -> None:
    for k, v in snap["params"].items():
        model.params[k].data = v.copy()
    for k, v in snap["buffers"].items():
        model.set_buffer(k, v)


def fit(model, train_panels, val_panels, config: TrainConfig):
    """Mini-batch training with per-epoch validation AUC model selection.

    With an empty validation split, selection falls back to the final
    epoch (logged as a warning) and early stopping is disabled.
    """
    x, mask, y = panels_to_arrays(train_panels)
    has_val = bool(val_panels)
    if has_val:
        xv, mv, yv = panels_to_arrays(val_panels)
    else:
        log.warning("fit: empty validation split; selecting final-epoch "
                    "parameters, early stopping disabled")

    opt = Adam(list(model.params.values()), config.learning_rate,
               config.beta1, config.beta2, config.epsilon)
    rng = Rng(config.seed)
    report = TrainReport()
    best_auc = -np.inf
    best_snap = None
    since_best = 0
    step_times: list[float] = []

    for epoch in range(config.max_epochs):
        order = rng.spawn(epoch).permutation(len(x))
        losses = []
        for lo in range(0, len(x), config.batch_size):
            idx = order[lo:lo + config.batch_size]
            t0 = time.perf_counter()
            opt.zero_grad()
            drop_rng = rng.spawn(epoch * 100_000 + lo)
            try:
                y_hat = model.forward(x[idx], mask[idx], mode="train", rng=drop_rng)
                loss = bce_loss(y_hat, y[idx], config.pos_weight)
            except NumericInputError as exc:
                raise DivergenceError(
                    f"non-finite forward at epoch {epoch}, "
                    f"step {lo // config.batch_size}: {exc}") from exc
            value = float(loss.data)
            if not np.isfinite(value):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, step {lo // config.batch_size}")
            loss.backward()
            opt.step()
            step_times.append(time.perf_counter() - t0)
            losses.append(value)
        report.epoch_losses.append(float(np.mean(losses)))

        if has_val:
            scores = predict_scores(model, xv, mv, config.batch_size)
            auc = auc_roc(scores, yv)
            report.val_auc.append(auc)
            if auc > best_auc:
                best_auc = auc
                best_snap = _snapshot(model)
                report.selected_epoch = epoch
                since_best = 0
            else:
                since_best += 1
                if since_best >= config.patience:
                    report.stopped_early = True
                    break
        else:
            report.selected_epoch = epoch

    if best_snap is not None:
        _restore(model, best_snap)
    report.seconds_per_step = float(np.median(step_times)) if step_times else 0.0
    return model, report


def benchmark_step_time(model, x: np.ndarray, mask: np.ndarray, y: np.ndarray,
                        n_steps: int, config: TrainConfig | None = None,
                        warmup: int = 3) -> float:
    """Median seconds per optimization step on a fixed batch, after
    discarding the first `warmup` steps."""
    config = config or TrainConfig()
    opt = Adam(list(model.params.values()), config.learning_rate)
    rng = Rng(config.seed)
    times = []
    for step in range(n_steps + warmup):
        t0 = time.perf_counter()
        opt.zero_grad()
        y_hat = model.forward(x, mask, mode="train", rng=rng.spawn(step))
        loss = bce_loss(y_hat, y)
        loss.backward()
        opt.step()
        if step >= warmup:
            times.append(time.perf_counter() - t0)
    return float(np.median(times))


# Table rows keep this order to match the timing-table layout.
BENCH_ORDER = ("ugru", "mgru", "te", "tmtsc")


def relative_time_table(seconds: dict[str, float]) -> list[dict]:
    """Normalize each model's step time to the fastest one (1.0x)."""
    fastest = min(seconds.values())
    rows = []
    for name in BENCH_ORDER:
        if name in seconds:
            rows.append({"model": name, "sec_per_step": seconds[name],
                         "relative_time": seconds[name] / fastest})
    return rows
