"""
MLP classifier exposing logits, penultimate features and the final FC weights.

Every hidden layer is ``relu(h @ W_k + b_k)`` with ``W_k`` stored in x out
layout; the penultimate features are the output of the last relu. The final
layer keeps the class weights as a C x d_feat matrix (one row per class) and
computes ``logits = features @ W.T + b``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.data.rng import Rng
from app.exceptions import ConfigurationError, DimensionError
from app.tensor import ops
from app.tensor.tensor import Tensor


@dataclass(frozen=True)
class ForwardOutput:
    logits: Tensor
    features: Tensor


class MlpClassifier:
    """Parameters are plain arrays; ``forward`` wraps them (or given leaves) into tensors."""

    def __init__(self, layer_dims: Sequence[int], num_classes: int, parameters: Sequence[np.ndarray]):
        self.layer_dims = tuple(int(d) for d in layer_dims)
        self.num_classes = int(num_classes)
        if len(self.layer_dims) < 2:
            raise ConfigurationError("layer_dims needs an input width and at least one hidden width")
        if self.d_feat <= self.num_classes:
            raise ConfigurationError(
                f"penultimate width {self.d_feat} must exceed class count {self.num_classes}"
            )
        expected = self.parameter_shapes()
        if len(parameters) != len(expected):
            raise DimensionError(f"expected {len(expected)} parameter arrays, got {len(parameters)}")
        params = []
        for array, shape in zip(parameters, expected):
            array = np.array(array, dtype=np.float64)
            if array.shape != shape:
                raise DimensionError(f"parameter shape {array.shape} does not match {shape}")
            array.flags.writeable = False
            params.append(array)
        self._parameters: tuple[np.ndarray, ...] = tuple(params)

    @property
    def d_in(self) -> int:
        return self.layer_dims[0]

    @property
    def d_feat(self) -> int:
        return self.layer_dims[-1]

    @property
    def fc_weight(self) -> np.ndarray:
        return self._parameters[-2]

    @property
    def fc_bias(self) -> np.ndarray:
        return self._parameters[-1]

    def parameter_shapes(self) -> list[tuple[int, ...]]:
        return parameter_shapes(self.layer_dims, self.num_classes)

    def parameters(self) -> list[np.ndarray]:
        return list(self._parameters)

    def with_parameters(self, parameters: Sequence[np.ndarray]) -> MlpClassifier:
        return MlpClassifier(self.layer_dims, self.num_classes, parameters)

    def leaves(self) -> list[Tensor]:
        """Fresh gradient-tracking leaves for one training step."""
        return [Tensor(p, requires_grad=True) for p in self._parameters]

    def forward(self, x: np.ndarray | Tensor, leaves: Sequence[Tensor] | None = None) -> ForwardOutput:
        params = list(leaves) if leaves is not None else [Tensor(p) for p in self._parameters]
        h = x if isinstance(x, Tensor) else Tensor(x)
        if h.data.ndim != 2 or h.shape[1] != self.d_in:
            raise DimensionError(f"input width {h.shape[-1]} does not match model input width {self.d_in}")
        for k in range(len(self.layer_dims) - 1):
            h = ops.relu(ops.matmul(h, params[2 * k]) + params[2 * k + 1])
        logits = ops.matmul(h, ops.transpose(params[-2])) + params[-1]
        return ForwardOutput(logits=logits, features=h)


def parameter_shapes(layer_dims: Sequence[int], num_classes: int) -> list[tuple[int, ...]]:
    shapes: list[tuple[int, ...]] = []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        shapes += [(fan_in, fan_out), (fan_out,)]
    shapes += [(num_classes, layer_dims[-1]), (num_classes,)]
    return shapes


def init(layer_dims: Sequence[int], C: int, seed: int) -> MlpClassifier:
    """
    Fan-in scaled uniform initialization.

    Every weight is drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) in layer
    order; biases start at zero.
    """
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2:
        raise ConfigurationError("layer_dims needs an input width and at least one hidden width")
    if dims[-1] <= C:
        raise ConfigurationError(f"penultimate width {dims[-1]} must exceed class count {C}")
    rng = Rng(seed)
    params: list[np.ndarray] = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        params += [rng.uniform(-bound, bound, (fan_in, fan_out)), np.zeros(fan_out)]
    bound = 1.0 / np.sqrt(dims[-1])
    params += [rng.uniform(-bound, bound, (C, dims[-1])), np.zeros(C)]
    return MlpClassifier(dims, C, params)


def normalized_class_weights(model: MlpClassifier) -> tuple[np.ndarray, np.ndarray]:
    """Unit-length class weight rows and a per-row degeneracy flag."""
    normalized, degenerate = ops.l2_normalize(Tensor(model.fc_weight))
    return normalized.data, degenerate
