from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.exceptions import DimensionError
from app.types.train_types import TrainConfig


@dataclass
class SgdState:
    """Momentum buffers, one per parameter array."""

    velocity: list[np.ndarray]

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> SgdState:
        return cls([np.zeros_like(p) for p in params])


def cosine_lr(epoch: int, config: TrainConfig) -> float:
    """lr0 * (1 + cos(pi * epoch / epochs)) / 2."""
    if config.epochs == 0:
        return config.lr0
    return config.lr0 * 0.5 * (1.0 + math.cos(math.pi * epoch / config.epochs))


def sgd_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    lr: float,
    momentum: float,
    weight_decay: float,
    state: SgdState,
) -> tuple[list[np.ndarray], SgdState]:
    """
    Coupled weight decay with heavy-ball momentum:
    g = grad + wd * theta;  v = momentum * v + g;  theta = theta - lr * v
    """
    if len(params) != len(grads) or len(params) != len(state.velocity):
        raise DimensionError(f"{len(params)} parameters, {len(grads)} gradients, {len(state.velocity)} buffers")
    new_params, new_velocity = [], []
    for theta, grad, v in zip(params, grads, state.velocity):
        if grad.shape != theta.shape or v.shape != theta.shape:
            raise DimensionError(f"gradient shape {grad.shape} does not match parameter shape {theta.shape}")
        g = grad + weight_decay * theta
        v = momentum * v + g
        new_params.append(theta - lr * v)
        new_velocity.append(v)
    return new_params, SgdState(new_velocity)
