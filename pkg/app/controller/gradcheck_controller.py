"""Finite-difference suite over every differentiable op and training loss."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.data.batching import LabeledBatch, OutlierBatch
from app.data.rng import Rng
from app.exceptions import NumericError
from app.nn import losses, mlp
from app.repository.report_repository import ReportRepository
from app.tensor import ops
from app.tensor.gradcheck import FD_STEP, check_gradients
from app.tensor.tensor import Tensor
from app.types.train_types import LossVariant, LossWeights

logger = logging.getLogger(__name__)

GRADCHECK_FILE = "gradcheck.csv"
# Inputs closer than this to a relu/abs kink are resampled
KINK_MARGIN = 1e-3
MAX_DRAWS = 100

Sampler = Callable[[Rng], list[np.ndarray]]
Objective = Callable[[list[Tensor]], Tensor]


@dataclass(frozen=True)
class GradcheckCase:
    name: str
    kind: str
    sample: Sampler
    objective: Objective
    valid: Callable[[list[np.ndarray]], bool] = lambda inputs: True
    # trailing inputs held fixed (data rather than parameters)
    constants: int = 0

    def bind(self, inputs: list[np.ndarray]) -> tuple[Objective, list[np.ndarray]]:
        if not self.constants:
            return self.objective, inputs
        split = len(inputs) - self.constants
        fixed = [Tensor(c) for c in inputs[split:]]
        return (lambda t: self.objective(list(t) + fixed)), inputs[:split]


@dataclass(frozen=True)
class GradcheckRow:
    name: str
    kind: str
    max_rel_error: float
    passed: bool


def _away_from_zero(values: np.ndarray) -> bool:
    return bool(np.min(np.abs(values)) > KINK_MARGIN)


def _unit(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _projected(out: Tensor, seed: int = 7) -> Tensor:
    """Contract an output with fixed random weights so every entry matters."""
    weights = Rng(seed, 999).normal(out.shape)
    return ops.sum(out * Tensor(weights))


def _op_cases() -> list[GradcheckCase]:
    return [
        GradcheckCase("matmul", "op", lambda r: [r.normal((3, 4)), r.normal((4, 2))],
                      lambda t: _projected(ops.matmul(t[0], t[1]))),
        GradcheckCase("add_broadcast", "op", lambda r: [r.normal((3, 4)), r.normal(4)],
                      lambda t: _projected(t[0] + t[1])),
        GradcheckCase("sub", "op", lambda r: [r.normal((3, 4)), r.normal((3, 4))],
                      lambda t: _projected(t[0] - t[1])),
        GradcheckCase("mul", "op", lambda r: [r.normal((3, 4)), r.normal((3, 4))],
                      lambda t: _projected(t[0] * t[1])),
        GradcheckCase("div", "op", lambda r: [r.normal((3, 4)), r.uniform(0.5, 2.0, (3, 4))],
                      lambda t: _projected(t[0] / t[1])),
        GradcheckCase("transpose", "op", lambda r: [r.normal((3, 5))],
                      lambda t: _projected(ops.transpose(t[0]))),
        GradcheckCase("relu", "op", lambda r: [r.normal((4, 5))],
                      lambda t: _projected(ops.relu(t[0])), lambda x: _away_from_zero(x[0])),
        GradcheckCase("abs", "op", lambda r: [r.normal((4, 5))],
                      lambda t: _projected(ops.absolute(t[0])), lambda x: _away_from_zero(x[0])),
        GradcheckCase("exp", "op", lambda r: [r.normal((3, 4))],
                      lambda t: _projected(ops.exp(t[0]))),
        GradcheckCase("log", "op", lambda r: [r.uniform(0.5, 2.0, (3, 4))],
                      lambda t: _projected(ops.log(t[0]))),
        GradcheckCase("sum_axis", "op", lambda r: [r.normal((3, 4))],
                      lambda t: _projected(ops.sum(t[0], axis=0))),
        GradcheckCase("mean_axis", "op", lambda r: [r.normal((3, 4))],
                      lambda t: _projected(ops.mean(t[0], axis=1))),
        GradcheckCase("log_softmax", "op", lambda r: [r.normal((4, 5))],
                      lambda t: _projected(ops.log_softmax(t[0]))),
        GradcheckCase("l2_normalize", "op", lambda r: [r.normal((4, 6))],
                      lambda t: _projected(ops.l2_normalize(t[0])[0])),
        GradcheckCase("row_norm", "op", lambda r: [r.normal((4, 6))],
                      lambda t: _projected(ops.row_norm(t[0]))),
        GradcheckCase("pairwise_distance", "op", lambda r: [r.normal((3, 6)), r.normal((4, 6))],
                      lambda t: _projected(ops.pairwise_distance(t[0], t[1]))),
        GradcheckCase("take_rows", "op", lambda r: [r.normal((4, 3))],
                      lambda t: _projected(ops.take_rows(t[0], np.array([0, 2, 2, 3, 1])))),
        GradcheckCase("pick", "op", lambda r: [r.normal((4, 3))],
                      lambda t: _projected(ops.pick(t[0], np.array([0, 2, 1, 2])))),
    ]


_LABELS = np.array([0, 1, 2, 0, 1, 2])


def _cosines(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return _unit(features) @ _unit(weights).T


def _loss_cases() -> list[GradcheckCase]:
    return [
        GradcheckCase("ce", "loss", lambda r: [r.normal((6, 3))],
                      lambda t: losses.ce_loss(t[0], _LABELS)),
        GradcheckCase("oe", "loss", lambda r: [r.normal((5, 3))],
                      lambda t: losses.oe_loss(t[0])),
        GradcheckCase("orth", "loss", lambda r: [r.normal((5, 8)), r.normal((3, 8))],
                      lambda t: losses.orth_loss(t[0], t[1]),
                      lambda x: _away_from_zero(_cosines(x[0], x[1]))),
        GradcheckCase("nc", "loss", lambda r: [r.normal((6, 8)), r.normal((3, 8))],
                      lambda t: losses.nc_loss(t[0], _LABELS, t[1])),
        GradcheckCase("euclidean", "loss", lambda r: [r.normal((5, 8)), r.normal((6, 8)), r.normal((3, 8))],
                      lambda t: losses.euclidean_ablation_loss(t[0], t[1], _LABELS, t[2])),
        _composite_case(LossVariant.OURS),
        _composite_case(LossVariant.EUCLIDEAN),
    ]


_LAYERS = [5, 8, 6]


def _composite_case(variant: LossVariant) -> GradcheckCase:
    """Stage-2 objective differentiated end to end through a small MLP."""
    shapes = mlp.parameter_shapes(_LAYERS, 3)

    def sample(rng: Rng) -> list[np.ndarray]:
        model = mlp.init(_LAYERS, 3, int(rng.integers(2**31, 1)[0]))
        # random biases so pre-activations spread
        params = [p if p.ndim == 2 else rng.normal(p.shape) * 0.5 for p in model.parameters()]
        return params + [rng.normal((6, _LAYERS[0])), rng.normal((5, _LAYERS[0]))]

    def objective(t: list[Tensor]) -> Tensor:
        params, (id_x, ood_x) = t[:len(shapes)], t[len(shapes):]
        model = mlp.MlpClassifier(_LAYERS, 3, [p.data for p in params])
        loss, _ = losses.composite_loss(
            2, LabeledBatch(id_x.data, _LABELS), OutlierBatch(ood_x.data), model, LossWeights(), variant, params
        )
        return loss

    def valid(values: list[np.ndarray]) -> bool:
        params, (id_x, ood_x) = values[:len(shapes)], values[len(shapes):]
        for x, is_ood in ((id_x, False), (ood_x, True)):
            h = x
            for k in range(len(_LAYERS) - 1):
                pre = h @ params[2 * k] + params[2 * k + 1]
                if not _away_from_zero(pre):
                    return False
                h = np.maximum(pre, 0.0)
            if np.any(np.linalg.norm(h, axis=1) < 1e-2):
                return False
            if is_ood and not _away_from_zero(_cosines(h, params[-2])):
                return False
        return True

    return GradcheckCase(f"composite_{variant.value}", "loss", sample, objective, valid, constants=2)


class GradcheckController:
    """Controller running the gradient-check suite."""

    def __init__(self):
        self.reports = ReportRepository()

    def cases(self) -> list[GradcheckCase]:
        return _op_cases() + _loss_cases()

    def run(self, seed: int = 0, step: float = FD_STEP) -> list[GradcheckRow]:
        """
        Check every case on inputs drawn from ``seed``.

        Raises:
            NumericError: if no kink-free inputs can be drawn for a case
        """
        rows = []
        for index, case in enumerate(self.cases()):
            rng = Rng(seed, 1000 + index)
            for _ in range(MAX_DRAWS):
                inputs = case.sample(rng)
                if case.valid(inputs):
                    break
            else:
                raise NumericError(f"{case.name}: no inputs away from non-differentiable points after {MAX_DRAWS} draws")
            objective, variables = case.bind(inputs)
            result = check_gradients(objective, variables, step)
            rows.append(GradcheckRow(case.name, case.kind, result.max_rel_error, result.passed))
            log = logger.info if result.passed else logger.error
            log(f"{case.name:<22} max_rel_error={result.max_rel_error:.3e} {'ok' if result.passed else 'FAILED'}")
        return rows

    def save(self, rows: list[GradcheckRow], out_dir: str | Path) -> Path:
        return self.reports.write_rows(
            Path(out_dir) / GRADCHECK_FILE,
            ("name", "kind", "max_rel_error", "passed"),
            [[row.name, row.kind, row.max_rel_error, "pass" if row.passed else "FAIL"] for row in rows],
        )

    @staticmethod
    def require_pass(rows: list[GradcheckRow]) -> None:
        failed = [row.name for row in rows if not row.passed]
        if failed:
            raise NumericError(f"gradient check failed for: {', '.join(failed)}")
