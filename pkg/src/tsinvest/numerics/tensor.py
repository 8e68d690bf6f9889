"""Reverse-mode automatic differentiation over float64 numpy arrays.

A Tensor wraps an ndarray and remembers how it was produced; backward()
walks the graph in reverse topological order and accumulates gradients.
Everything is double precision by design: the gradient test suite relies
on it.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable

import numpy as np

from ..errors import DimensionError

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph construction inside the block (pure forward)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    # collapse added leading axes
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    # collapse axes that were broadcast from size 1
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """Node in the autodiff graph. Data is always float64."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False,
                 parents: Iterable["Tensor"] = (),
                 backward: Callable[[np.ndarray], None] | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad and _grad_enabled
        self._parents = tuple(parents) if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def of(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(x)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- graph mechanics -----------------------------------------------------

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Backpropagate from this node; defaults to d(self)/d(self)=1."""
        if grad is None:
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self._accumulate(np.asarray(grad, dtype=np.float64))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        other = Tensor.of(other)
        out_data = self.data + other.data
        req = self.requires_grad or other.requires_grad

        def bwd(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g, other.shape))

        return Tensor(out_data, req, (self, other), bwd)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        def bwd(g):
            self._accumulate(-g)
        return Tensor(-self.data, self.requires_grad, (self,), bwd)

    def __sub__(self, other) -> "Tensor":
        return self + (-Tensor.of(other))

    def __rsub__(self, other) -> "Tensor":
        return Tensor.of(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = Tensor.of(other)
        out_data = self.data * other.data
        req = self.requires_grad or other.requires_grad

        def bwd(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g * other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g * self.data, other.shape))

        return Tensor(out_data, req, (self, other), bwd)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = Tensor.of(other)
        out_data = self.data / other.data
        req = self.requires_grad or other.requires_grad

        def bwd(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g / other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(-g * self.data / other.data ** 2,
                                               other.shape))

        return Tensor(out_data, req, (self, other), bwd)

    def __rtruediv__(self, other) -> "Tensor":
        return Tensor.of(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        def bwd(g):
            self._accumulate(g * exponent * self.data ** (exponent - 1))
        return Tensor(self.data ** exponent, self.requires_grad, (self,), bwd)

    def __matmul__(self, other) -> "Tensor":
        other = Tensor.of(other)
        if self.data.shape[-1] != other.data.shape[-2 if other.ndim > 1 else 0]:
            raise DimensionError(
                f"matmul shapes do not conform: {self.shape} @ {other.shape}")
        out_data = self.data @ other.data
        req = self.requires_grad or other.requires_grad

        def bwd(g):
            if self.requires_grad:
                ga = g @ np.swapaxes(other.data, -1, -2)
                self._accumulate(_unbroadcast(ga, self.shape))
            if other.requires_grad:
                gb = np.swapaxes(self.data, -1, -2) @ g
                other._accumulate(_unbroadcast(gb, other.shape))

        return Tensor(out_data, req, (self, other), bwd)

    # -- shape ops -------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape

        def bwd(g):
            self._accumulate(g.reshape(old))
        return Tensor(self.data.reshape(shape), self.requires_grad, (self,), bwd)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inv = np.argsort(axes)

        def bwd(g):
            self._accumulate(g.transpose(inv))
        return Tensor(self.data.transpose(axes), self.requires_grad, (self,), bwd)

    def __getitem__(self, key) -> "Tensor":
        def bwd(g):
            full = np.zeros_like(self.data)
            np.add.at(full, key, g)
            self._accumulate(full)
        return Tensor(self.data[key], self.requires_grad, (self,), bwd)

    # -- reductions ------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out_data = self.data.sum(axis=axis, keepdims=keepdims)

        def bwd(g):
            if axis is None:
                self._accumulate(np.broadcast_to(g, self.shape).copy()
                                 if np.ndim(g) else np.full(self.shape, g))
                return
            gg = g
            if not keepdims:
                gg = np.expand_dims(gg, axis)
            self._accumulate(np.broadcast_to(gg, self.shape).copy())

        return Tensor(out_data, self.requires_grad, (self,), bwd)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            n = self.size
        else:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            n = int(np.prod([self.shape[a] for a in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- elementwise nonlinearities ---------------------------------------

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)

        def bwd(g):
            self._accumulate(g * out_data)
        return Tensor(out_data, self.requires_grad, (self,), bwd)

    def log(self) -> "Tensor":
        def bwd(g):
            self._accumulate(g / self.data)
        return Tensor(np.log(self.data), self.requires_grad, (self,), bwd)

    def sqrt(self) -> "Tensor":
        out_data = np.sqrt(self.data)

        def bwd(g):
            self._accumulate(g * 0.5 / out_data)
        return Tensor(out_data, self.requires_grad, (self,), bwd)

    def tanh(self) -> "Tensor":
        out_data = np.tanh(self.data)

        def bwd(g):
            self._accumulate(g * (1.0 - out_data ** 2))
        return Tensor(out_data, self.requires_grad, (self,), bwd)

    def sigmoid(self) -> "Tensor":
        # numerically symmetric form, stable at both tails
        out_data = np.where(self.data >= 0,
                            1.0 / (1.0 + np.exp(-np.clip(self.data, 0, None))),
                            np.exp(np.clip(self.data, None, 0))
                            / (1.0 + np.exp(np.clip(self.data, None, 0))))

        def bwd(g):
            self._accumulate(g * out_data * (1.0 - out_data))
        return Tensor(out_data, self.requires_grad, (self,), bwd)

    def relu(self) -> "Tensor":
        mask = self.data > 0

        def bwd(g):
            self._accumulate(g * mask)
        return Tensor(self.data * mask, self.requires_grad, (self,), bwd)


def concat(parts: list[Tensor], axis: int = -1) -> Tensor:
    """Concatenate tensors along an axis, splitting the gradient back."""
    parts = [Tensor.of(p) for p in parts]
    out_data = np.concatenate([p.data for p in parts], axis=axis)
    req = any(p.requires_grad for p in parts)
    sizes = [p.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                p._accumulate(g[tuple(idx)])

    return Tensor(out_data, req, tuple(parts), bwd)


def stack(parts: list[Tensor], axis: int = 0) -> Tensor:
    """Stack tensors along a new axis."""
    parts = [Tensor.of(p) for p in parts]
    out_data = np.stack([p.data for p in parts], axis=axis)
    req = any(p.requires_grad for p in parts)

    def bwd(g):
        for i, p in enumerate(parts):
            if p.requires_grad:
                p._accumulate(np.take(g, i, axis=axis))

    return Tensor(out_data, req, tuple(parts), bwd)


class Parameter(Tensor):
    """Named learnable tensor; gradient buffer always allocated on demand."""

    __slots__ = ("name",)

    def __init__(self, name: str, value):
        super().__init__(value, requires_grad=True)
        self.name = name
        # Parameters stay differentiable even when created under no_grad.
        self.requires_grad = True

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"
