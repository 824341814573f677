"""Differentiable operations over ``Tensor``."""

from __future__ import annotations

from typing import Any

import numpy as np

from app.exceptions import DimensionError
from app.tensor.tensor import Function, Tensor

NORM_EPS = 1e-12


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(a: np.ndarray, b: np.ndarray) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise DimensionError(f"Cannot combine shapes {a.shape} and {b.shape}") from e


class Add(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        return a + b

    def backward(self, grad: np.ndarray):
        a, b = self.parents
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)


class Sub(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        return a - b

    def backward(self, grad: np.ndarray):
        a, b = self.parents
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)


class Mul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        return a * b

    def backward(self, grad: np.ndarray):
        a, b = self.parents
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)


class Div(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        return a / b

    def backward(self, grad: np.ndarray):
        a, b = self.parents
        return (
            _unbroadcast(grad / b.data, a.shape),
            _unbroadcast(-grad * a.data / (b.data * b.data), b.shape),
        )


class Neg(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        return -a

    def backward(self, grad: np.ndarray):
        return (-grad,)


class MatMul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul needs (m,k) x (k,n), got {a.shape} x {b.shape}")
        return a @ b

    def backward(self, grad: np.ndarray):
        a, b = self.parents
        return grad @ b.data.T, a.data.T @ grad


class Transpose(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        if a.ndim != 2:
            raise DimensionError(f"transpose needs a matrix, got shape {a.shape}")
        return a.T

    def backward(self, grad: np.ndarray):
        return (grad.T,)


class Relu(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        mask = a > 0
        self.save_for_backward(mask)
        return np.where(mask, a, 0.0)

    def backward(self, grad: np.ndarray):
        (mask,) = self.saved
        return (np.where(mask, grad, 0.0),)


class Abs(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        return np.abs(a)

    def backward(self, grad: np.ndarray):
        # sign(0) == 0 gives the zero subgradient at the kink
        return (grad * np.sign(self.parents[0].data),)


class Exp(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        out = np.exp(a)
        self.save_for_backward(out)
        return out

    def backward(self, grad: np.ndarray):
        (out,) = self.saved
        return (grad * out,)


class Log(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        return np.log(a)

    def backward(self, grad: np.ndarray):
        return (grad / self.parents[0].data,)


class Sum(Function):
    def forward(self, a: np.ndarray, axis: int | None = None) -> np.ndarray:
        if a.ndim == 1:
            axis = None
        self.save_for_backward(axis)
        return np.asarray(a.sum(axis=axis))

    def backward(self, grad: np.ndarray):
        (axis,) = self.saved
        shape = self.parents[0].shape
        if axis is None:
            return (np.full(shape, grad.reshape(-1)[0]),)
        return (np.broadcast_to(np.expand_dims(grad, axis), shape).copy(),)


class Mean(Function):
    def forward(self, a: np.ndarray, axis: int | None = None) -> np.ndarray:
        if a.ndim == 1:
            axis = None
        count = a.size if axis is None else a.shape[axis]
        self.save_for_backward(axis, count)
        return np.asarray(a.mean(axis=axis))

    def backward(self, grad: np.ndarray):
        axis, count = self.saved
        shape = self.parents[0].shape
        if axis is None:
            return (np.full(shape, grad.reshape(-1)[0] / count),)
        return (np.broadcast_to(np.expand_dims(grad, axis) / count, shape).copy(),)


class LogSoftmax(Function):
    def forward(self, logits: np.ndarray) -> np.ndarray:
        if logits.ndim != 2 or logits.shape[1] < 2:
            raise DimensionError(f"log_softmax needs n x C with C >= 2, got {logits.shape}")
        shifted = logits - logits.max(axis=1, keepdims=True)
        out = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        self.save_for_backward(out)
        return out

    def backward(self, grad: np.ndarray):
        (out,) = self.saved
        return (grad - np.exp(out) * grad.sum(axis=1, keepdims=True),)


class L2Normalize(Function):
    def forward(self, a: np.ndarray, eps: float = NORM_EPS) -> np.ndarray:
        rows = a if a.ndim == 2 else a.reshape(1, -1)
        norms = np.sqrt((rows * rows).sum(axis=1, keepdims=True))
        degenerate = norms[:, 0] <= eps
        safe = np.where(degenerate[:, None], 1.0, norms)
        out = np.where(degenerate[:, None], 0.0, rows / safe)
        self.save_for_backward(out, safe, degenerate)
        return out.reshape(a.shape)

    def backward(self, grad: np.ndarray):
        out, norms, degenerate = self.saved
        g = grad.reshape(out.shape)
        # d(x/|x|) = (g - y (y.g)) / |x|
        dx = (g - out * (out * g).sum(axis=1, keepdims=True)) / norms
        dx = np.where(degenerate[:, None], 0.0, dx)
        return (dx.reshape(self.parents[0].shape),)


class RowNorm(Function):
    def forward(self, a: np.ndarray) -> np.ndarray:
        if a.ndim != 2:
            raise DimensionError(f"row_norm needs a matrix, got shape {a.shape}")
        norms = np.sqrt((a * a).sum(axis=1))
        self.save_for_backward(norms)
        return norms

    def backward(self, grad: np.ndarray):
        (norms,) = self.saved
        a = self.parents[0].data
        safe = np.where(norms > 0, norms, 1.0)
        return (np.where((norms > 0)[:, None], a * (grad / safe)[:, None], 0.0),)


class PairwiseDistance(Function):
    def forward(self, z: np.ndarray, w: np.ndarray) -> np.ndarray:
        if z.ndim != 2 or w.ndim != 2 or z.shape[1] != w.shape[1]:
            raise DimensionError(f"pairwise_distance needs (m,d) and (C,d), got {z.shape}, {w.shape}")
        diff = z[:, None, :] - w[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        self.save_for_backward(diff, dist)
        return dist

    def backward(self, grad: np.ndarray):
        diff, dist = self.saved
        safe = np.where(dist > 0, dist, 1.0)
        coeff = np.where(dist > 0, grad / safe, 0.0)
        contrib = coeff[:, :, None] * diff
        return contrib.sum(axis=1), -contrib.sum(axis=0)


class TakeRows(Function):
    def forward(self, a: np.ndarray, index: np.ndarray) -> np.ndarray:
        if a.ndim != 2:
            raise DimensionError(f"take_rows needs a matrix, got shape {a.shape}")
        self.save_for_backward(index)
        return a[index]

    def backward(self, grad: np.ndarray):
        (index,) = self.saved
        out = np.zeros(self.parents[0].shape)
        np.add.at(out, index, grad)
        return (out,)


class Pick(Function):
    def forward(self, a: np.ndarray, index: np.ndarray) -> np.ndarray:
        if a.ndim != 2 or index.shape != (a.shape[0],):
            raise DimensionError(f"pick needs (n,C) values and n indices, got {a.shape}, {index.shape}")
        self.save_for_backward(index)
        return a[np.arange(a.shape[0]), index]

    def backward(self, grad: np.ndarray):
        (index,) = self.saved
        out = np.zeros(self.parents[0].shape)
        out[np.arange(out.shape[0]), index] = grad
        return (out,)


def add(a: Any, b: Any) -> Tensor:
    return Add.apply(a, b)


def sub(a: Any, b: Any) -> Tensor:
    return Sub.apply(a, b)


def mul(a: Any, b: Any) -> Tensor:
    return Mul.apply(a, b)


def div(a: Any, b: Any) -> Tensor:
    return Div.apply(a, b)


def neg(a: Tensor) -> Tensor:
    return Neg.apply(a)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(a, b)


def transpose(a: Tensor) -> Tensor:
    return Transpose.apply(a)


def relu(a: Tensor) -> Tensor:
    return Relu.apply(a)


def absolute(a: Tensor) -> Tensor:
    return Abs.apply(a)


def exp(a: Tensor) -> Tensor:
    return Exp.apply(a)


def log(a: Tensor) -> Tensor:
    return Log.apply(a)


def sum(a: Tensor, axis: int | None = None) -> Tensor:  # noqa: A001
    return Sum.apply(a, axis=axis)


def mean(a: Tensor, axis: int | None = None) -> Tensor:
    return Mean.apply(a, axis=axis)


def log_softmax(logits: Tensor) -> Tensor:
    """Row-wise log-softmax using max subtraction and log-sum-exp."""
    return LogSoftmax.apply(logits)


def l2_normalize(v: Tensor, eps: float = NORM_EPS) -> tuple[Tensor, np.ndarray]:
    """
    Normalize a vector, or each row of a matrix, to unit length.

    Rows whose norm is at most ``eps`` come back as zeros and are flagged in
    the returned boolean mask (one entry per row).
    """
    out = L2Normalize.apply(v, eps=eps)
    rows = v.data if v.data.ndim == 2 else v.data.reshape(1, -1)
    degenerate = np.sqrt((rows * rows).sum(axis=1)) <= eps
    return out, degenerate


def row_norm(a: Tensor) -> Tensor:
    return RowNorm.apply(a)


def pairwise_distance(z: Tensor, w: Tensor) -> Tensor:
    """Euclidean distance between every row of ``z`` and every row of ``w``."""
    return PairwiseDistance.apply(z, w)


def take_rows(a: Tensor, index: np.ndarray) -> Tensor:
    return TakeRows.apply(a, index=np.asarray(index, dtype=np.int64))


def pick(a: Tensor, index: np.ndarray) -> Tensor:
    """Select ``a[i, index[i]]`` for every row i."""
    return Pick.apply(a, index=np.asarray(index, dtype=np.int64))
