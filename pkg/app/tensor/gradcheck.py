"""Central finite-difference checks for tape gradients."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from app.tensor.tensor import Tensor, backward

FD_STEP = 1e-4
REL_TOLERANCE = 1e-4
# Gradient norms below this are compared absolutely
NORM_FLOOR = 1e-6


@dataclass(frozen=True)
class GradCheckResult:
    max_rel_error: float
    per_input: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.max_rel_error < REL_TOLERANCE


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), NORM_FLOOR)
    return float(np.linalg.norm(analytic - numeric)) / scale


def analytic_gradients(fn: Callable[[list[Tensor]], Tensor], inputs: Sequence[np.ndarray]) -> list[np.ndarray]:
    leaves = [Tensor(x, requires_grad=True) for x in inputs]
    loss = fn(leaves)
    backward(loss)
    return [leaf.grad if leaf.grad is not None else np.zeros(leaf.shape) for leaf in leaves]


def numeric_gradients(
    fn: Callable[[list[Tensor]], Tensor],
    inputs: Sequence[np.ndarray],
    step: float = FD_STEP,
) -> list[np.ndarray]:
    base = [np.array(x, dtype=np.float64) for x in inputs]
    grads = []
    for i, x in enumerate(base):
        grad = np.zeros_like(x)
        flat = x.reshape(-1)
        for j in range(flat.size):
            original = flat[j]
            flat[j] = original + step
            plus = fn([Tensor(v) for v in base]).item()
            flat[j] = original - step
            minus = fn([Tensor(v) for v in base]).item()
            flat[j] = original
            grad.reshape(-1)[j] = (plus - minus) / (2.0 * step)
        grads.append(grad)
    return grads


def check_gradients(
    fn: Callable[[list[Tensor]], Tensor],
    inputs: Sequence[np.ndarray],
    step: float = FD_STEP,
) -> GradCheckResult:
    """Compare tape gradients of a scalar function with central differences."""
    analytic = analytic_gradients(fn, inputs)
    numeric = numeric_gradients(fn, inputs, step)
    errors = tuple(relative_error(a, n) for a, n in zip(analytic, numeric))
    return GradCheckResult(max(errors) if errors else 0.0, errors)
