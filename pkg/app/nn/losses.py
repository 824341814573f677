"""
Training objectives.

Every feature/weight loss normalizes its inputs itself and differentiates
through the normalization of both the features and the class weights.
Batch reduction is always the arithmetic mean.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from app.data.batching import LabeledBatch, OutlierBatch
from app.exceptions import DataError
from app.nn.mlp import MlpClassifier
from app.tensor import ops
from app.tensor.tensor import Tensor
from app.types.train_types import LossTerm, LossVariant, LossWeights, active_terms

logger = logging.getLogger(__name__)

EUCLIDEAN_EPS = 1e-6


def _check_labels(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise DataError(f"labels must lie in [0, {num_classes}), got range [{labels.min()}, {labels.max()}]")
    return labels.astype(np.int64)


def _normalized_weights(class_weights: Tensor) -> Tensor:
    normalized, degenerate = ops.l2_normalize(class_weights)
    if degenerate.any():
        logger.warning(f"{int(degenerate.sum())} class weight rows are degenerate")
    return normalized


def ce_loss(logits: Tensor, labels: np.ndarray) -> Tensor:
    labels = _check_labels(labels, logits.shape[1])
    return -ops.mean(ops.pick(ops.log_softmax(logits), labels))


def oe_loss(ood_logits: Tensor) -> Tensor:
    """Cross-entropy between OOD softmax outputs and the uniform distribution."""
    # mean over all m x C entries == mean over the batch of (1/C) sum_j
    return -ops.mean(ops.log_softmax(ood_logits))


def orth_scores(features: Tensor, class_weights: Tensor) -> Tensor:
    """Per-sample (1/C) sum_i |cos(z, w_i)|; degenerate features score 0."""
    z, _ = ops.l2_normalize(features)
    w = _normalized_weights(class_weights)
    return ops.mean(ops.absolute(ops.matmul(z, ops.transpose(w))), axis=1)


def orth_loss(ood_features: Tensor, class_weights: Tensor) -> Tensor:
    return ops.mean(orth_scores(ood_features, class_weights))


def nc_cosines(id_features: Tensor, labels: np.ndarray, class_weights: Tensor) -> Tensor:
    """cos(z_ID, w_y) for every sample."""
    labels = _check_labels(labels, class_weights.shape[0])
    z, _ = ops.l2_normalize(id_features)
    w_y = ops.take_rows(_normalized_weights(class_weights), labels)
    return ops.sum(z * w_y, axis=1)


def nc_loss(id_features: Tensor, labels: np.ndarray, class_weights: Tensor) -> Tensor:
    return -ops.mean(nc_cosines(id_features, labels, class_weights))


def euclidean_ood_term(ood_features: Tensor, class_weights: Tensor) -> Tensor:
    """Mean over the batch of (1/C) sum_i 1 / (|z - w_i| + eps)."""
    z, _ = ops.l2_normalize(ood_features)
    w = _normalized_weights(class_weights)
    return ops.mean(1.0 / (ops.pairwise_distance(z, w) + EUCLIDEAN_EPS))


def euclidean_id_term(id_features: Tensor, labels: np.ndarray, class_weights: Tensor) -> Tensor:
    labels = _check_labels(labels, class_weights.shape[0])
    z, _ = ops.l2_normalize(id_features)
    w_y = ops.take_rows(_normalized_weights(class_weights), labels)
    return ops.mean(ops.row_norm(z - w_y))


def euclidean_ablation_loss(
    ood_features: Tensor,
    id_features: Tensor,
    labels: np.ndarray,
    class_weights: Tensor,
) -> Tensor:
    return euclidean_ood_term(ood_features, class_weights) + euclidean_id_term(id_features, labels, class_weights)


@dataclass(frozen=True)
class LossBreakdown:
    """Raw value of each active term, its weighted contribution and the total."""

    stage: int
    values: dict[LossTerm, float]
    weighted: dict[LossTerm, float]
    total: float
    degenerate_ood: int = 0
    terms: frozenset[LossTerm] = field(default_factory=frozenset)

    def value(self, term: LossTerm) -> float | None:
        return self.values.get(term)


def composite_loss(
    stage: int,
    batch_id: LabeledBatch,
    batch_ood: OutlierBatch | None,
    model: MlpClassifier,
    weights: LossWeights,
    variant: LossVariant = LossVariant.OURS,
    leaves: Sequence[Tensor] | None = None,
) -> tuple[Tensor, LossBreakdown]:
    """
    Stage 1: CE + lambda OE. Stage 2: CE + lambda OE + alpha NC + beta Orth.

    ``variant`` drops terms for the ablation settings; the Euclidean variant
    swaps NC/Orth for the distance-based terms. Pass ``leaves`` to get
    gradients with respect to the model parameters.
    """
    terms = active_terms(variant, stage)
    params = list(leaves) if leaves is not None else [Tensor(p) for p in model.parameters()]
    class_weights = params[-2]

    id_out = model.forward(batch_id.features, params)
    parts: dict[LossTerm, Tensor] = {LossTerm.CE: ce_loss(id_out.logits, batch_id.labels)}

    degenerate_ood = 0
    if terms & {LossTerm.OE, LossTerm.ORTH, LossTerm.EUC_OOD}:
        if batch_ood is None:
            raise DataError(f"variant {variant.value} needs an OOD batch in stage {stage}")
        ood_out = model.forward(batch_ood.features, params)
        if LossTerm.OE in terms:
            parts[LossTerm.OE] = oe_loss(ood_out.logits)
        if LossTerm.ORTH in terms:
            parts[LossTerm.ORTH] = orth_loss(ood_out.features, class_weights)
        if LossTerm.EUC_OOD in terms:
            parts[LossTerm.EUC_OOD] = euclidean_ood_term(ood_out.features, class_weights)
        _, degenerate = ops.l2_normalize(Tensor(ood_out.features.data))
        degenerate_ood = int(degenerate.sum())
        if degenerate_ood:
            logger.debug(f"{degenerate_ood} degenerate OOD features in batch")

    if LossTerm.NC in terms:
        parts[LossTerm.NC] = nc_loss(id_out.features, batch_id.labels, class_weights)
    if LossTerm.EUC_ID in terms:
        parts[LossTerm.EUC_ID] = euclidean_id_term(id_out.features, batch_id.labels, class_weights)

    total: Tensor | None = None
    weighted: dict[LossTerm, float] = {}
    for term in LossTerm:
        if term not in parts:
            continue
        contribution = weights.weight_of(term) * parts[term]
        weighted[term] = contribution.item()
        total = contribution if total is None else total + contribution

    breakdown = LossBreakdown(
        stage=stage,
        values={term: part.item() for term, part in parts.items()},
        weighted=weighted,
        total=total.item(),
        degenerate_ood=degenerate_ood,
        terms=terms,
    )
    return total, breakdown
