"""Reverse-mode automatic differentiation over dense numpy arrays.

A Tensor wraps an ndarray plus the closure needed to push gradients to its
parents. Only the primitives the sequence models need are provided. Arrays
may be float32 (training) or float64 (gradient checking); operations never
change the dtype they are given.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import NumericalError, ShapeError


class Tensor:
    """An ndarray with an optional gradient and a backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: tuple["Tensor", ...] = (),
        backward_fn: Callable | None = None,
    ):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward_fn = backward_fn

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def item(self) -> float:
        return float(self.data)

    # -- graph traversal ---------------------------------------------------

    def backward(self, grad: np.ndarray | None = None) -> None:
        if grad is None:
            grad = np.ones_like(self.data)
        self.grad = np.asarray(grad) if self.grad is None else self.grad + grad

        order: list[Tensor] = []
        state: dict[int, int] = {}
        stack: list[Tensor] = [self]
        while stack:
            node = stack.pop()
            st = state.get(id(node), 0)
            if st == 0:
                state[id(node)] = 1
                stack.append(node)
                for p in node._parents:
                    if p.requires_grad and state.get(id(p), 0) == 0:
                        stack.append(p)
            elif st == 1:
                state[id(node)] = 2
                order.append(node)

        for node in reversed(order):
            if node._backward_fn is None or node.grad is None:
                continue
            for parent, pg in zip(node._parents, node._backward_fn(node.grad)):
                if pg is None or not parent.requires_grad:
                    continue
                parent.grad = pg if parent.grad is None else parent.grad + pg

    # -- operators -----------------------------------------------------------

    def _coerce(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.data.dtype))

    def __add__(self, other):
        other = self._coerce(other)
        out_data = self.data + other.data
        return Tensor(
            out_data,
            parents=(self, other),
            backward_fn=lambda g: (
                _unbroadcast(g, self.data.shape),
                _unbroadcast(g, other.data.shape),
            ),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.data, parents=(self,), backward_fn=lambda g: (-g,))

    def __sub__(self, other):
        other = self._coerce(other)
        return Tensor(
            self.data - other.data,
            parents=(self, other),
            backward_fn=lambda g: (
                _unbroadcast(g, self.data.shape),
                _unbroadcast(-g, other.data.shape),
            ),
        )

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        other = self._coerce(other)
        return Tensor(
            self.data * other.data,
            parents=(self, other),
            backward_fn=lambda g: (
                _unbroadcast(g * other.data, self.data.shape),
                _unbroadcast(g * self.data, other.data.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return Tensor(
            self.data / other.data,
            parents=(self, other),
            backward_fn=lambda g: (
                _unbroadcast(g / other.data, self.data.shape),
                _unbroadcast(-g * self.data / other.data**2, other.data.shape),
            ),
        )

    def __matmul__(self, other):
        other = self._coerce(other)
        a, b = self.data, other.data
        if a.ndim > 2 or b.ndim > 2:
            raise ShapeError("matmul supports 1-D and 2-D operands only")
        out = a @ b

        def backward_fn(g):
            if a.ndim == 2 and b.ndim == 2:
                return g @ b.T, a.T @ g
            if a.ndim == 1 and b.ndim == 2:
                return b @ g, np.outer(a, g)
            if a.ndim == 2 and b.ndim == 1:
                return np.outer(g, b), a.T @ g
            return g * b, g * a

        return Tensor(out, parents=(self, other), backward_fn=backward_fn)

    def __getitem__(self, key):
        out = self.data[key]

        def backward_fn(g):
            gx = np.zeros_like(self.data)
            gx[key] += g
            return (gx,)

        return Tensor(out, parents=(self,), backward_fn=backward_fn)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out = self.data.sum(axis=axis, keepdims=keepdims)

        def backward_fn(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, self.data.shape).copy(),)

        return Tensor(out, parents=(self,), backward_fn=backward_fn)

    def reshape(self, *shape) -> "Tensor":
        old = self.data.shape
        return Tensor(
            self.data.reshape(*shape),
            parents=(self,),
            backward_fn=lambda g: (g.reshape(old),),
        )

    @property
    def T(self) -> "Tensor":
        if self.data.ndim != 2:
            raise ShapeError("T is defined for 2-D tensors")
        return Tensor(self.data.T, parents=(self,), backward_fn=lambda g: (g.T,))


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return Tensor(out, parents=(x,), backward_fn=lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    return Tensor(np.log(x.data), parents=(x,), backward_fn=lambda g: (g / x.data,))


def sigmoid(x: Tensor) -> Tensor:
    out = np.empty_like(x.data)
    pos = x.data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x.data[pos]))
    e = np.exp(x.data[~pos])
    out[~pos] = e / (1.0 + e)
    return Tensor(out, parents=(x,), backward_fn=lambda g: (g * out * (1.0 - out),))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stabilized softmax (max subtraction is mandatory)."""
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward_fn(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner),)

    return Tensor(out, parents=(x,), backward_fn=backward_fn)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    m = x.data.max(axis=axis, keepdims=True)
    shifted = x.data - m
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse

    def backward_fn(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return Tensor(out, parents=(x,), backward_fn=backward_fn)


def take_rows(x: Tensor, idx: np.ndarray) -> Tensor:
    """Row gather along axis 0 (embedding lookup)."""
    idx = np.asarray(idx)

    def backward_fn(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, idx, g)
        return (gx,)

    return Tensor(x.data[idx], parents=(x,), backward_fn=backward_fn)


def gather_last(x: Tensor, idx: np.ndarray) -> Tensor:
    """Pick one element along the last axis per leading index."""
    idx = np.asarray(idx)
    out = np.take_along_axis(x.data, idx[..., None], axis=-1)[..., 0]

    def backward_fn(g):
        gx = np.zeros_like(x.data)
        grids = np.indices(idx.shape)
        np.add.at(gx, (*grids, idx), g)
        return (gx,)

    return Tensor(out, parents=(x,), backward_fn=backward_fn)


def pad_front_rows(x: Tensor, n: int) -> Tensor:
    """Prepend n zero rows along axis 0."""
    pad_shape = (n,) + x.data.shape[1:]
    out = np.concatenate([np.zeros(pad_shape, dtype=x.data.dtype), x.data], axis=0)
    return Tensor(out, parents=(x,), backward_fn=lambda g: (g[n:],))


def pad_rows_to(x: Tensor, total: int) -> Tensor:
    """Append zero rows along axis 0 up to the requested row count."""
    rows = x.data.shape[0]
    if rows > total:
        raise ShapeError(f"cannot pad {rows} rows down to {total}")
    pad_shape = (total - rows,) + x.data.shape[1:]
    out = np.concatenate([x.data, np.zeros(pad_shape, dtype=x.data.dtype)], axis=0)
    return Tensor(out, parents=(x,), backward_fn=lambda g: (g[:rows],))


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward_fn(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor(out, parents=tuple(tensors), backward_fn=backward_fn)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward_fn(g):
        slicer = [slice(None)] * g.ndim
        grads = []
        for i in range(len(tensors)):
            slicer[axis] = slice(offsets[i], offsets[i + 1])
            grads.append(g[tuple(slicer)])
        return tuple(grads)

    return Tensor(out, parents=tuple(tensors), backward_fn=backward_fn)


def grad_check(
    f: Callable[..., Tensor], inputs: Sequence[Tensor], eps: float = 1e-5
) -> float:
    """Max relative error between analytic and central-difference gradients.

    f must map the given tensors to a scalar Tensor and be pure. Inputs must
    be float64; the error for each element is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    """
    for x in inputs:
        if x.data.dtype != np.float64:
            raise ValueError("grad_check requires float64 inputs")
        x.requires_grad = True
        x.zero_grad()

    out = f(*inputs)
    if out.data.size != 1:
        raise ShapeError("grad_check expects a scalar-valued function")
    if not np.isfinite(out.data).all():
        raise NumericalError("non-finite value in forward pass")
    out.backward()

    worst = 0.0
    for x in inputs:
        analytic = x.grad if x.grad is not None else np.zeros_like(x.data)
        if not np.isfinite(analytic).all():
            raise NumericalError("non-finite analytic gradient")
        numeric = np.zeros_like(x.data)
        flat = x.data.reshape(-1)
        nflat = numeric.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            fp = float(f(*inputs).data)
            flat[i] = orig - eps
            fm = float(f(*inputs).data)
            flat[i] = orig
            nflat[i] = (fp - fm) / (2.0 * eps)
        if not np.isfinite(numeric).all():
            raise NumericalError("non-finite numeric gradient")
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
        worst = max(worst, float(np.max(np.abs(analytic - numeric) / denom)))
    return worst
