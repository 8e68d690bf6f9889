"""Neural-network kernels used by all four models.

Mask convention throughout the package: ``step_mask[b, t] == 1.0`` means
time step t of sample b is real (observed); 0.0 means padded. Padded steps
are excluded from attention keys and from batch-norm statistics.
"""

from __future__ import annotations

import numpy as np

from ..errors import (ConfigurationError, DegenerateBatchError,
                      DimensionError, NumericInputError, VocabularyError)
from .rng import Rng
from .tensor import Tensor, concat

NEG_INF_LOGIT = -1e30

# While non-None, relu() records the smallest |pre-activation| it sees so
# the gradient checker can skip coordinates sitting on the kink.
_kink_tracker: list[float] | None = None


def relu(x: Tensor) -> Tensor:
    if _kink_tracker is not None and x.size:
        _kink_tracker.append(float(np.min(np.abs(x.data))))
    return x.relu()


def dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Affine map: row i of the output is W @ x_i + b.

    x: (..., F), w: (G, F), b: (G,) -> (..., G).
    """
    x, w, b = Tensor.of(x), Tensor.of(w), Tensor.of(b)
    if x.shape[-1] != w.shape[-1]:
        raise DimensionError(
            f"dense: input shape {x.shape} does not conform to weight shape {w.shape}")
    if w.shape[-2] != b.shape[-1]:
        raise DimensionError(
            f"dense: weight shape {w.shape} does not conform to bias shape {b.shape}")
    return x @ w.transpose(*range(w.ndim - 2), w.ndim - 1, w.ndim - 2) + b


def softmax(v: Tensor, axis: int = -1) -> Tensor:
    """Stable softmax along `axis` (max subtracted before exponentiation)."""
    v = Tensor.of(v)
    if not np.all(np.isfinite(v.data)):
        raise NumericInputError("softmax: input contains non-finite entries")
    shifted = v - Tensor(np.max(v.data, axis=axis, keepdims=True))
    e = shifted.exp()
    return e / e.sum(axis=axis, keepdims=True)


class RunningStats:
    """Per-channel EMA of mean and variance for batch norm eval mode."""

    def __init__(self, dim: int):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)

    def update(self, batch_mean: np.ndarray, batch_var: np.ndarray,
               momentum: float) -> None:
        self.mean = (1.0 - momentum) * self.mean + momentum * batch_mean
        self.var = (1.0 - momentum) * self.var + momentum * batch_var


def batch_norm(x: Tensor, gamma: Tensor, beta: Tensor, step_mask: np.ndarray,
               mode: str, running: RunningStats,
               eps: float = 1e-5, momentum: float = 0.1) -> Tensor:
    """Channel-wise batch normalization over unmasked (batch, time) positions.

    x: (B, T, D). Statistics use biased variance and exclude padded steps;
    padded positions still pass through the same affine normalization so the
    output keeps its shape. Eval mode normalizes with the running stats.
    """
    x = Tensor.of(x)
    if mode == "train":
        w = np.asarray(step_mask, dtype=np.float64)[..., None]  # (B, T, 1)
        count = w.sum()
        if count == 0:
            raise DegenerateBatchError("batch_norm: all positions are masked")
        wt = Tensor(w)
        mean = (x * wt).sum(axis=(0, 1)) * (1.0 / count)
        centered = x - mean.reshape(1, 1, -1)
        var = (centered * centered * wt).sum(axis=(0, 1)) * (1.0 / count)
        running.update(mean.data, var.data, momentum)
        inv = (var + eps) ** -0.5
        return centered * inv.reshape(1, 1, -1) * gamma + beta
    mean = Tensor(running.mean)
    inv = Tensor((running.var + eps) ** -0.5)
    return (x - mean) * inv * gamma + beta


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each (..., D) slice over its channels (biased variance)."""
    x = Tensor.of(x)
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered * (var + eps) ** -0.5 * gamma + beta


def multi_head_attention(h: Tensor, step_mask: np.ndarray, n_heads: int,
                         params: dict) -> Tensor:
    """Scaled dot-product self-attention with key-padding masking.

    h: (B, T, D). Padded keys get logit NEG_INF_LOGIT so their attention
    weight underflows to exactly 0. params holds w_q/w_k/w_v/w_o of shape
    (D, D) and b_q/b_k/b_v/b_o of shape (D,).
    """
    b_sz, t_sz, d = h.shape
    if d % n_heads != 0:
        raise ConfigurationError(
            f"multi_head_attention: model dim {d} not divisible by {n_heads} heads")
    dh = d // n_heads

    def split_heads(x: Tensor) -> Tensor:
        return x.reshape(b_sz, t_sz, n_heads, dh).transpose(0, 2, 1, 3)

    q = split_heads(dense(h, params["w_q"], params["b_q"]))
    k = split_heads(dense(h, params["w_k"], params["b_k"]))
    v = split_heads(dense(h, params["w_v"], params["b_v"]))

    logits = q @ k.transpose(0, 1, 3, 2) * (1.0 / np.sqrt(dh))
    mask = np.asarray(step_mask, dtype=np.float64)
    logits = logits + Tensor((1.0 - mask)[:, None, None, :] * NEG_INF_LOGIT)
    attn = softmax(logits, axis=-1)
    out = (attn @ v).transpose(0, 2, 1, 3).reshape(b_sz, t_sz, d)
    return dense(out, params["w_o"], params["b_o"])


def gru_cell(x_t: Tensor, h_prev: Tensor, params: dict) -> Tensor:
    """One GRU step with gate order [reset, update, candidate]:

        r = sigma(W_r x + U_r h + b_r)
        z = sigma(W_z x + U_z h + b_z)
        c = tanh(W_h x + U_h (r*h) + b_h)
        h' = (1 - z) * h + z * c

    Weights are gate-stacked: params["w"] is (F, 3H) (or (G, F, 3H) for a
    stack of G independent cells), params["u"] is (H, 3H), params["b"] (3H,).
    """
    w, u, b = params["w"], params["u"], params["b"]
    hid = u.shape[-2]
    if x_t.shape[-1] != w.shape[-2]:
        raise DimensionError(
            f"gru_cell: input shape {x_t.shape} does not conform to weight shape {w.shape}")

    def proj(vec: Tensor, mat: Tensor) -> Tensor:
        if mat.ndim == 2:
            return vec @ mat
        # stacked cells: (..., G, F) @ (G, F, 3H) -> (..., G, 3H)
        out = vec.reshape(*vec.shape[:-1], 1, vec.shape[-1]) @ mat
        return out.reshape(*out.shape[:-2], out.shape[-1])

    gx = proj(x_t, w) + b
    gh = proj(h_prev, u)
    r = (gx[..., 0:hid] + gh[..., 0:hid]).sigmoid()
    z = (gx[..., hid:2 * hid] + gh[..., hid:2 * hid]).sigmoid()
    c = (gx[..., 2 * hid:] + proj(r * h_prev, u)[..., 2 * hid:]).tanh()
    return (1.0 - z) * h_prev + z * c


def _gru_scan(x: Tensor, step_mask: np.ndarray, params: dict,
              time_indices: range) -> Tensor:
    """Run gru_cell over the given time order, carrying state through
    masked steps unchanged. x: (B, ..., T, F) with time at axis -2."""
    hid = params["u"].shape[-2]
    state_shape = x.shape[:-2] + (hid,)
    h = Tensor(np.zeros(state_shape))
    b_sz = x.shape[0]
    for t in time_indices:
        idx = (slice(None),) * (x.ndim - 2) + (t,)
        x_t = x[idx]
        h_new = gru_cell(x_t, h, params)
        m = step_mask[:, t].reshape((b_sz,) + (1,) * (h.ndim - 1))
        h = h_new * Tensor(m) + h * Tensor(1.0 - m)
    return h


def bidirectional_gru(x: Tensor, step_mask: np.ndarray, params_fwd: dict,
                      params_bwd: dict) -> Tensor:
    """Final forward and backward GRU states, concatenated.

    x: (B, T, F) or (B, G, T, F) for G independent feature tracks sharing
    the step mask. Masked steps are skipped (state carried through), so the
    result never depends on values stored at masked positions.
    """
    x = Tensor.of(x)
    mask = np.asarray(step_mask, dtype=np.float64)
    if np.any(mask.sum(axis=1) == 0):
        raise DegenerateBatchError(
            "bidirectional_gru: a sample has every time step masked")
    t_sz = x.shape[-2]
    h_f = _gru_scan(x, mask, params_fwd, range(t_sz))
    h_b = _gru_scan(x, mask, params_bwd, range(t_sz - 1, -1, -1))
    return concat([h_f, h_b], axis=-1)


def embedding_lookup(ids: np.ndarray, table: Tensor) -> Tensor:
    """Gather rows of `table` (V, E) at integer `ids`; gradients accumulate
    into the looked-up rows."""
    ids = np.asarray(ids)
    vocab = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        bad = ids[(ids < 0) | (ids >= vocab)].flat[0]
        raise VocabularyError(f"embedding id {int(bad)} outside vocabulary of size {vocab}")
    return table[ids.astype(np.intp)]


def dropout(x: Tensor, rate: float, mode: str, rng: Rng | None) -> Tensor:
    """Inverted dropout: identity in eval mode, scaled Bernoulli in train."""
    if rate < 0 or rate >= 1:
        raise ConfigurationError(f"dropout rate must be in [0, 1), got {rate}")
    if mode != "train" or rate == 0.0:
        return Tensor.of(x)
    keep = (rng.uniform(size=x.shape) >= rate) / (1.0 - rate)
    return Tensor.of(x) * Tensor(keep)
