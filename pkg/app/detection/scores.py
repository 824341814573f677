"""ID-ness scores; higher means more in-distribution."""

from __future__ import annotations

import numpy as np

from app.model.report_schema import ScoreKind, ScoreSeries
from app.nn.losses import orth_scores
from app.nn.mlp import MlpClassifier
from app.tensor import ops
from app.tensor.tensor import Tensor


def _rows(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return values.reshape(1, -1) if values.ndim == 1 else values


def msp_score(logits: np.ndarray) -> np.ndarray:
    """Maximum softmax probability per row."""
    return np.exp(ops.log_softmax(Tensor(_rows(logits))).data).max(axis=1)


def orth_term(features: np.ndarray, class_weights: np.ndarray) -> np.ndarray:
    """(1/C) sum_i |cos(z, w_i)| per row, shared with the Orth loss."""
    return orth_scores(Tensor(_rows(features)), Tensor(class_weights)).data.copy()


def combined_score(logits: np.ndarray, features: np.ndarray, class_weights: np.ndarray) -> np.ndarray:
    """MSP plus the mean absolute cosine between the feature and every class weight."""
    return msp_score(logits) + orth_term(features, class_weights)


def score_samples(model: MlpClassifier, x: np.ndarray, kind: ScoreKind) -> np.ndarray:
    out = model.forward(x)
    if kind is ScoreKind.MSP:
        return msp_score(out.logits.data)
    return combined_score(out.logits.data, out.features.data, model.fc_weight)


def score_series(model: MlpClassifier, id_x: np.ndarray, ood_x: np.ndarray, kind: ScoreKind) -> ScoreSeries:
    return ScoreSeries(
        id_scores=score_samples(model, id_x, kind),
        ood_scores=score_samples(model, ood_x, kind),
        score_kind=kind,
    )
