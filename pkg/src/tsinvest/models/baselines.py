"""The three baseline classifiers: U-GRU, M-GRU, and TE.

U-GRU runs one bidirectional GRU per input feature (the 15 numeric tracks
are stored gate-stacked so they evaluate in one pass; the embedded
categorical track has its own cell). M-GRU shares the transformer's input
embedding path and uses a single bidirectional GRU. TE is a classic
encoder stack with sinusoidal positions and layer norm, pooled by masked
mean over unmasked steps.
"""

from __future__ import annotations

import numpy as np

from ..numerics import (Tensor, bidirectional_gru, concat, dense, dropout,
                        embedding_lookup, layer_norm, multi_head_attention,
                        relu, softmax)
from ..numerics.rng import Rng
from .base import ParamStore, embed_inputs, sinusoidal_encoding, split_inputs
from .config import GruConfig, TransformerConfig, N_NUMERIC


def _gru_direction(store: ParamStore, prefix: str, in_dim: int, hidden: int,
                   stack: int | None = None) -> None:
    shape_w = (in_dim, 3 * hidden) if stack is None else (stack, in_dim, 3 * hidden)
    shape_u = (hidden, 3 * hidden) if stack is None else (stack, hidden, 3 * hidden)
    store.weight(f"{prefix}.w", shape_w)
    store.weight(f"{prefix}.u", shape_u)
    store.bias(f"{prefix}.b", shape_w[:-2] + (3 * hidden,) if stack else 3 * hidden)


def _gru_params(params: dict, prefix: str) -> dict:
    return {"w": params[f"{prefix}.w"], "u": params[f"{prefix}.u"],
            "b": params[f"{prefix}.b"]}


class UGru:
    """One bidirectional GRU per feature; all final states concatenated."""

    name = "ugru"

    def __init__(self, config: GruConfig, vocab_size: int, seed: int):
        config.validate()
        self.config = config
        self.vocab_size = vocab_size
        h = config.hidden
        store = ParamStore(seed)
        store.weight("embedding", (vocab_size, config.embed_dim))
        for d in ("fwd", "bwd"):
            _gru_direction(store, f"num.{d}", 1, h, stack=N_NUMERIC)
        for d in ("fwd", "bwd"):
            _gru_direction(store, f"cat.{d}", config.embed_dim, h)
        width = 2 * h * (N_NUMERIC + 1)
        store.weight("head.w", (config.n_classes, width))
        store.bias("head.b", config.n_classes)
        self.params = store.all()

    def buffers(self) -> dict:
        return {}

    def forward(self, x_batch: np.ndarray, step_mask: np.ndarray,
                mode: str = "eval", rng: Rng | None = None) -> Tensor:
        p = self.params
        u, v = split_inputs(x_batch)
        b_sz = u.shape[0]
        # (B, G, T, 1): G parallel univariate tracks
        tracks = Tensor(u.transpose(0, 2, 1)[..., None])
        num_out = bidirectional_gru(tracks, step_mask,
                                    _gru_params(p, "num.fwd"),
                                    _gru_params(p, "num.bwd"))
        num_flat = num_out.reshape(b_sz, N_NUMERIC * 2 * self.config.hidden)
        emb = embedding_lookup(v.astype(np.intp), p["embedding"])
        cat_out = bidirectional_gru(emb, step_mask,
                                    _gru_params(p, "cat.fwd"),
                                    _gru_params(p, "cat.bwd"))
        hidden = concat([num_flat, cat_out], axis=-1)
        hidden = dropout(hidden, self.config.dropout_rate, mode, rng)
        return softmax(dense(hidden, p["head.w"], p["head.b"]))


class MGru:
    """Single bidirectional GRU over the shared embedded input path."""

    name = "mgru"

    def __init__(self, config: GruConfig, vocab_size: int, seed: int):
        config.validate()
        self.config = config
        self.vocab_size = vocab_size
        store = ParamStore(seed)
        store.weight("embedding", (vocab_size, config.embed_dim))
        for d in ("fwd", "bwd"):
            _gru_direction(store, f"gru.{d}", config.k_prime, config.hidden)
        store.weight("head.w", (config.n_classes, 2 * config.hidden))
        store.bias("head.b", config.n_classes)
        self.params = store.all()

    def buffers(self) -> dict:
        return {}

    def forward(self, x_batch: np.ndarray, step_mask: np.ndarray,
                mode: str = "eval", rng: Rng | None = None) -> Tensor:
        p = self.params
        x_aug = embed_inputs(x_batch, p["embedding"])
        out = bidirectional_gru(x_aug, step_mask,
                                _gru_params(p, "gru.fwd"),
                                _gru_params(p, "gru.bwd"))
        out = dropout(out, self.config.dropout_rate, mode, rng)
        return softmax(dense(out, p["head.w"], p["head.b"]))


class TransformerEncoderBaseline:
    """Post-norm encoder stack with sinusoidal positions and layer norm."""

    name = "te"

    def __init__(self, config: TransformerConfig, vocab_size: int, seed: int):
        config.validate()
        self.config = config
        self.vocab_size = vocab_size
        d, ff = config.d_model, config.ff_dim
        store = ParamStore(seed)
        store.weight("embedding", (vocab_size, config.embed_dim))
        store.weight("input.w", (d, config.k_prime))
        store.bias("input.b", d)
        for i in range(config.n_blocks):
            pre = f"block{i}"
            for side in ("q", "k", "v", "o"):
                store.weight(f"{pre}.attn.w_{side}", (d, d))
                store.bias(f"{pre}.attn.b_{side}", d)
            store.constant(f"{pre}.ln1.gamma", np.ones(d))
            store.bias(f"{pre}.ln1.beta", d)
            store.weight(f"{pre}.ff.w1", (ff, d))
            store.bias(f"{pre}.ff.b1", ff)
            store.weight(f"{pre}.ff.w2", (d, ff))
            store.bias(f"{pre}.ff.b2", d)
            store.constant(f"{pre}.ln2.gamma", np.ones(d))
            store.bias(f"{pre}.ln2.beta", d)
        store.weight("head.w", (config.n_classes, d))
        store.bias("head.b", config.n_classes)
        self.params = store.all()
        self.pos_table = sinusoidal_encoding(config.t_len, d)

    def buffers(self) -> dict:
        return {}

    def forward(self, x_batch: np.ndarray, step_mask: np.ndarray,
                mode: str = "eval", rng: Rng | None = None) -> Tensor:
        p = self.params
        cfg = self.config
        x_aug = embed_inputs(x_batch, p["embedding"])
        cur = dense(x_aug, p["input.w"], p["input.b"]) + Tensor(self.pos_table)
        for i in range(cfg.n_blocks):
            pre = f"block{i}"
            attn_params = {f"{k}_{s}": p[f"{pre}.attn.{k}_{s}"]
                           for k in ("w", "b") for s in ("q", "k", "v", "o")}
            a = multi_head_attention(cur, step_mask, cfg.n_heads, attn_params)
            a = dropout(a, cfg.dropout_rate, mode, rng)
            cur = layer_norm(cur + a, p[f"{pre}.ln1.gamma"], p[f"{pre}.ln1.beta"])
            f = dense(relu(dense(cur, p[f"{pre}.ff.w1"], p[f"{pre}.ff.b1"])),
                      p[f"{pre}.ff.w2"], p[f"{pre}.ff.b2"])
            f = dropout(f, cfg.dropout_rate, mode, rng)
            cur = layer_norm(cur + f, p[f"{pre}.ln2.gamma"], p[f"{pre}.ln2.beta"])
        mask = np.asarray(step_mask, dtype=np.float64)
        pooled = (cur * Tensor(mask[..., None])).sum(axis=1) \
            * Tensor((1.0 / mask.sum(axis=1))[:, None])
        pooled = dropout(pooled, cfg.dropout_rate, mode, rng)
        return softmax(dense(pooled, p["head.w"], p["head.b"]))
