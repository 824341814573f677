"""
Dense float64 tensors with reverse-mode differentiation.

Every op applied to a tensor that requires gradients records a ``Function``
node holding its parents. ``backward`` walks the recorded graph once, in
reverse topological order, and leaves the gradient of each leaf in ``grad``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from app.exceptions import DimensionError, TapeError


class Tensor:
    """Immutable row-major float64 array that can take part in a tape."""

    __slots__ = ("data", "requires_grad", "grad", "_ctx")

    def __init__(self, data: Any, requires_grad: bool = False):
        array = np.array(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1)
        if array.size == 0:
            raise DimensionError("Tensor extents must be positive")
        array.flags.writeable = False
        self.data: np.ndarray = array
        self.requires_grad: bool = requires_grad
        self.grad: np.ndarray | None = None
        self._ctx: Function | None = None

    @classmethod
    def _from_op(cls, data: np.ndarray, ctx: Function | None) -> Tensor:
        out = cls.__new__(cls)
        array = np.ascontiguousarray(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1)
        array.flags.writeable = False
        out.data = array
        out.requires_grad = ctx is not None
        out.grad = None
        out._ctx = ctx
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def is_leaf(self) -> bool:
        return self._ctx is None

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar; the implementations live in app.tensor.ops
    def __add__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.add(self, other)

    def __radd__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.add(other, self)

    def __sub__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.mul(other, self)

    def __truediv__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> Tensor:
        from app.tensor import ops
        return ops.div(other, self)

    def __neg__(self) -> Tensor:
        from app.tensor import ops
        return ops.neg(self)

    def __matmul__(self, other: Tensor) -> Tensor:
        from app.tensor import ops
        return ops.matmul(self, other)

    @property
    def T(self) -> Tensor:
        from app.tensor import ops
        return ops.transpose(self)


def as_tensor(value: Any) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class Function:
    """
    One recorded operation.

    Subclasses implement ``forward`` on raw arrays and ``backward`` returning
    one gradient (or None) per parent.
    """

    def __init__(self, *parents: Tensor):
        self.parents: tuple[Tensor, ...] = parents
        self.saved: tuple[Any, ...] = ()
        self.consumed: bool = False

    def save_for_backward(self, *values: Any) -> None:
        self.saved = values

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *parents: Any, **kwargs: Any) -> Tensor:
        tensors = tuple(as_tensor(p) for p in parents)
        ctx = cls(*tensors)
        out = ctx.forward(*(t.data for t in tensors), **kwargs)
        if any(t.requires_grad for t in tensors):
            return Tensor._from_op(out, ctx)
        return Tensor._from_op(out, None)


@dataclass
class Tape:
    """Recorded operations of one forward graph, inputs before outputs."""

    nodes: list[Tensor] = field(default_factory=list)

    @classmethod
    def record(cls, root: Tensor) -> Tape:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node._ctx is not None:
                for parent in reversed(node._ctx.parents):
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return cls(order)

    def run_backward(self, seed: np.ndarray) -> None:
        if any(n._ctx is not None and n._ctx.consumed for n in self.nodes):
            raise TapeError("backward was already run on this graph")
        grads: dict[int, np.ndarray] = {id(self.nodes[-1]): seed}
        for node in reversed(self.nodes):
            grad = grads.pop(id(node), None)
            ctx = node._ctx
            if ctx is None:
                if grad is not None:
                    node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue
            ctx.consumed = True
            if grad is None:
                continue
            for parent, parent_grad in zip(ctx.parents, ctx.backward(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent_grad.shape != parent.shape:
                    raise DimensionError(
                        f"{type(ctx).__name__} produced gradient {parent_grad.shape} for {parent.shape}"
                    )
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad


def backward(scalar_loss: Tensor) -> None:
    """Fill ``grad`` on every leaf reachable from a scalar loss."""
    if scalar_loss.data.size != 1:
        raise TapeError(f"backward needs a scalar loss, got shape {scalar_loss.shape}")
    if not scalar_loss.requires_grad:
        return
    Tape.record(scalar_loss).run_backward(np.ones_like(scalar_loss.data))
