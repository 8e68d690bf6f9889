"""The main transformer classifier over company panels.

Input path: numeric features concatenated with embedded round-type ids,
linearly projected to the model dimension, plus fully learnable positional
encodings. Encoder blocks are post-norm with batch normalization; per-step
outputs are zeroed at padded steps and concatenated into one vector for
the softmax head, so predictions never depend on padding content.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import (RunningStats, Tensor, batch_norm, dense, dropout,
                        multi_head_attention, relu, softmax)
from ..numerics.rng import Rng
from .base import ParamStore, embed_inputs
from .config import TransformerConfig


@dataclass
class ForwardTrace:
    """Intermediates of one forward pass, for the architecture tests."""
    x_aug: Tensor        # (B, T, K') concatenated inputs
    h: Tensor            # (B, T, D) after the input projection
    h_prime: Tensor      # (B, T, D) with positional encodings added
    block_outputs: list  # per-block (B, T, D)
    z: Tensor            # (B, T*D) masked, concatenated encoder outputs
    y_hat: Tensor        # (B, C) class probabilities


class TMTSC:
    """Transformer-based multivariate time series classifier."""

    name = "tmtsc"

    def __init__(self, config: TransformerConfig, vocab_size: int, seed: int):
        config.validate()
        self.config = config
        self.vocab_size = vocab_size
        d, ff, t = config.d_model, config.ff_dim, config.t_len
        store = ParamStore(seed)
        store.weight("embedding", (vocab_size, config.embed_dim))
        store.weight("input.w", (d, config.k_prime))
        store.bias("input.b", d)
        store.weight("pos", (t, d))
        self.running: list[RunningStats] = []
        for i in range(config.n_blocks):
            pre = f"block{i}"
            for side in ("q", "k", "v", "o"):
                store.weight(f"{pre}.attn.w_{side}", (d, d))
                store.bias(f"{pre}.attn.b_{side}", d)
            store.constant(f"{pre}.bn1.gamma", np.ones(d))
            store.bias(f"{pre}.bn1.beta", d)
            store.weight(f"{pre}.ff.w1", (ff, d))
            store.bias(f"{pre}.ff.b1", ff)
            store.weight(f"{pre}.ff.w2", (d, ff))
            store.bias(f"{pre}.ff.b2", d)
            store.constant(f"{pre}.bn2.gamma", np.ones(d))
            store.bias(f"{pre}.bn2.beta", d)
            self.running.extend([RunningStats(d), RunningStats(d)])
        store.weight("head.w", (config.n_classes, t * d))
        store.bias("head.b", config.n_classes)
        self.params = store.all()

    def buffers(self) -> dict[str, np.ndarray]:
        out = {}
        for i in range(self.config.n_blocks):
            for j in (1, 2):
                rs = self.running[2 * i + (j - 1)]
                out[f"block{i}.bn{j}.running_mean"] = rs.mean
                out[f"block{i}.bn{j}.running_var"] = rs.var
        return out

    def set_buffer(self, name: str, value: np.ndarray) -> None:
        block, bn, kind = name.split(".")
        rs = self.running[2 * int(block[5:]) + (int(bn[2:]) - 1)]
        if kind == "running_mean":
            rs.mean = value.copy()
        else:
            rs.var = value.copy()

    def forward(self, x_batch: np.ndarray, step_mask: np.ndarray,
                mode: str = "eval", rng: Rng | None = None,
                trace: bool = False):
        p = self.params
        cfg = self.config
        b_sz = np.asarray(x_batch).shape[0]
        x_aug = embed_inputs(x_batch, p["embedding"])
        h = dense(x_aug, p["input.w"], p["input.b"])
        h_prime = h + p["pos"]
        mask3 = Tensor(np.asarray(step_mask, dtype=np.float64)[..., None])

        cur = h_prime
        block_outputs = []
        for i in range(cfg.n_blocks):
            pre = f"block{i}"
            attn_params = {f"{k}_{s}": p[f"{pre}.attn.{k}_{s}"]
                           for k in ("w", "b") for s in ("q", "k", "v", "o")}
            a = multi_head_attention(cur, step_mask, cfg.n_heads, attn_params)
            a = dropout(a, cfg.dropout_rate, mode, rng)
            cur = batch_norm(cur + a, p[f"{pre}.bn1.gamma"], p[f"{pre}.bn1.beta"],
                             step_mask, mode, self.running[2 * i])
            f = dense(relu(dense(cur, p[f"{pre}.ff.w1"], p[f"{pre}.ff.b1"])),
                      p[f"{pre}.ff.w2"], p[f"{pre}.ff.b2"])
            f = dropout(f, cfg.dropout_rate, mode, rng)
            cur = batch_norm(cur + f, p[f"{pre}.bn2.gamma"], p[f"{pre}.bn2.beta"],
                             step_mask, mode, self.running[2 * i + 1])
            block_outputs.append(cur)

        z = (cur * mask3).reshape(b_sz, cfg.t_len * cfg.d_model)
        y_hat = softmax(dense(z, p["head.w"], p["head.b"]))
        if trace:
            return ForwardTrace(x_aug, h, h_prime, block_outputs, z, y_hat)
        return y_hat
