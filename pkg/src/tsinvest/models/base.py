"""Shared model plumbing: the input embedding path (numeric columns
concatenated with the embedded round-type ids), parameter initialization
and counting."""

from __future__ import annotations

import numpy as np

from ..data.schema import CATEGORICAL_COLUMN, FEATURE_NAMES
from ..numerics import Rng, Tensor, concat, embedding_lookup
from ..numerics.tensor import Parameter

INIT_STD = 0.02
NUMERIC_COLUMNS = [i for i in range(len(FEATURE_NAMES)) if i != CATEGORICAL_COLUMN]


class ParamStore:
    """Ordered named parameters with Normal(0, 0.02) weight init."""

    def __init__(self, seed: int):
        self._rng = Rng(seed)
        self._params: dict[str, Parameter] = {}

    def weight(self, name: str, shape: tuple[int, ...]) -> Parameter:
        p = Parameter(name, self._rng.normal(scale=INIT_STD, size=shape))
        self._params[name] = p
        return p

    def bias(self, name: str, dim) -> Parameter:
        p = Parameter(name, np.zeros(dim))
        self._params[name] = p
        return p

    def constant(self, name: str, value: np.ndarray) -> Parameter:
        p = Parameter(name, value)
        self._params[name] = p
        return p

    def all(self) -> dict[str, Parameter]:
        return dict(self._params)


def count_params(params: dict[str, Parameter]) -> int:
    """Scalar learnables; batch-norm running stats live outside this dict."""
    return sum(p.size for p in params.values())


def split_inputs(x_batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Panel batch (B, T, 16) -> numeric part (B, T, 15) and the integer
    round-type id column (B, T)."""
    x_batch = np.asarray(x_batch, dtype=np.float64)
    u = x_batch[:, :, NUMERIC_COLUMNS]
    v = x_batch[:, :, CATEGORICAL_COLUMN]
    return u, v


def embed_inputs(x_batch: np.ndarray, table: Parameter) -> Tensor:
    """The shared input path: x'_t = [numeric_t ; embedding(round_type_t)],
    giving (B, T, 15 + E)."""
    u, v = split_inputs(x_batch)
    emb = embedding_lookup(v.astype(np.intp), table)
    return concat([Tensor(u), emb], axis=-1)


def sinusoidal_encoding(t_len: int, d_model: int) -> np.ndarray:
    """Classic fixed sin/cos positional table (T, D)."""
    pos = np.arange(t_len)[:, None]
    i = np.arange(d_model)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / d_model)
    table = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return table
