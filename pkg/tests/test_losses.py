from __future__ import annotations

import math

import numpy as np
import pytest

from app.data.batching import LabeledBatch, OutlierBatch
from app.exceptions import DataError
from app.nn import losses
from app.tensor.tensor import Tensor
from app.types.train_types import LossTerm, LossVariant, LossWeights, active_terms, uses_ood

# three orthonormal class weights in a 5-D feature space
WEIGHTS = Tensor(np.eye(3, 5))


def test_ce_on_uniform_logits():
    assert losses.ce_loss(Tensor(np.zeros((4, 3))), np.array([0, 1, 2, 0])).item() == pytest.approx(math.log(3))


def test_ce_rejects_out_of_range_labels():
    with pytest.raises(DataError):
        losses.ce_loss(Tensor(np.zeros((2, 3))), np.array([0, 3]))


def test_oe_is_minimal_at_uniform_output():
    assert losses.oe_loss(Tensor(np.zeros((5, 4)))).item() == pytest.approx(math.log(4))
    skewed = np.random.default_rng(3).normal(size=(5, 4)) * 3
    assert losses.oe_loss(Tensor(skewed)).item() > math.log(4)


def test_orth_loss_bounds():
    orthogonal = Tensor(np.array([[0.0, 0.0, 0.0, 2.0, 0.0], [0.0, 0.0, 0.0, 0.0, -1.0]]))
    assert losses.orth_loss(orthogonal, WEIGHTS).item() == pytest.approx(0.0, abs=1e-15)

    aligned = Tensor(np.array([[5.0, 0.0, 0.0, 0.0, 0.0]]))
    assert losses.orth_loss(aligned, WEIGHTS).item() == pytest.approx(1.0 / 3.0)

    features = Tensor(np.random.default_rng(0).normal(size=(20, 5)))
    value = losses.orth_loss(features, Tensor(np.random.default_rng(1).normal(size=(3, 5)))).item()
    assert 0.0 <= value <= 1.0


def test_orth_scores_ignore_feature_and_weight_scale():
    rng = np.random.default_rng(6)
    z, w = rng.normal(size=(4, 5)), rng.normal(size=(3, 5))
    base = losses.orth_scores(Tensor(z), Tensor(w)).data
    scaled = losses.orth_scores(Tensor(z * 7.0), Tensor(w * 0.1)).data
    assert np.allclose(base, scaled, atol=1e-12)


def test_degenerate_feature_scores_zero():
    features = Tensor(np.array([[0.0] * 5, [1.0, 0.0, 0.0, 0.0, 0.0]]))
    scores = losses.orth_scores(features, WEIGHTS).data
    assert scores[0] == 0.0
    assert np.all(np.isfinite(scores))


def test_nc_loss_at_collapse():
    features = Tensor(np.array([[2.0, 0, 0, 0, 0], [0, 3.0, 0, 0, 0], [0, 0, 0.5, 0, 0]]))
    labels = np.array([0, 1, 2])
    assert losses.nc_loss(features, labels, WEIGHTS).item() == pytest.approx(-1.0)
    assert losses.nc_cosines(features, labels, WEIGHTS).data == pytest.approx(np.ones(3))
    flipped = Tensor(-features.data)
    assert losses.nc_loss(flipped, labels, WEIGHTS).item() == pytest.approx(1.0)


def test_euclidean_terms():
    orthogonal = Tensor(np.array([[0.0, 0.0, 0.0, 1.0, 0.0]]))
    expected = 1.0 / (math.sqrt(2.0) + losses.EUCLIDEAN_EPS)
    assert losses.euclidean_ood_term(orthogonal, WEIGHTS).item() == pytest.approx(expected)

    collapsed = Tensor(np.eye(3, 5) * 4.0)
    assert losses.euclidean_id_term(collapsed, np.array([0, 1, 2]), WEIGHTS).item() == pytest.approx(0.0, abs=1e-12)
    total = losses.euclidean_ablation_loss(orthogonal, collapsed, np.array([0, 1, 2]), WEIGHTS).item()
    assert total == pytest.approx(expected)


@pytest.mark.parametrize(
    "variant, stage, expected",
    [
        (LossVariant.OURS, 1, {LossTerm.CE, LossTerm.OE}),
        (LossVariant.OURS, 2, {LossTerm.CE, LossTerm.OE, LossTerm.NC, LossTerm.ORTH}),
        (LossVariant.OE_ONLY, 2, {LossTerm.CE, LossTerm.OE}),
        (LossVariant.VANILLA, 2, {LossTerm.CE}),
        (LossVariant.V1, 1, {LossTerm.CE}),
        (LossVariant.V1, 2, {LossTerm.CE, LossTerm.NC, LossTerm.ORTH}),
        (LossVariant.V2, 2, {LossTerm.CE, LossTerm.OE, LossTerm.NC}),
        (LossVariant.V3, 2, {LossTerm.CE, LossTerm.OE, LossTerm.ORTH}),
        (LossVariant.EUCLIDEAN, 2, {LossTerm.CE, LossTerm.OE, LossTerm.EUC_ID, LossTerm.EUC_OOD}),
    ],
)
def test_active_terms(variant, stage, expected):
    assert active_terms(variant, stage) == expected


def test_uses_ood():
    assert not uses_ood(LossVariant.VANILLA)
    assert uses_ood(LossVariant.V1)
    assert uses_ood(LossVariant.OE_ONLY)


def _batches(id_data, aux_ood):
    return LabeledBatch(id_data.features[:12], id_data.labels[:12]), OutlierBatch(aux_ood.features[:10])


def test_composite_total_is_weighted_sum(small_model, id_data, aux_ood):
    batch_id, batch_ood = _batches(id_data, aux_ood)
    weights = LossWeights(lam=0.5, alpha=2.0, beta=3.0)
    loss, breakdown = losses.composite_loss(2, batch_id, batch_ood, small_model, weights)
    assert set(breakdown.values) == {LossTerm.CE, LossTerm.OE, LossTerm.NC, LossTerm.ORTH}
    expected = (
        breakdown.values[LossTerm.CE]
        + 0.5 * breakdown.values[LossTerm.OE]
        + 2.0 * breakdown.values[LossTerm.NC]
        + 3.0 * breakdown.values[LossTerm.ORTH]
    )
    assert loss.item() == pytest.approx(expected, rel=1e-12)
    assert breakdown.total == loss.item()


def test_stage_one_ignores_nc_and_orth(small_model, id_data, aux_ood):
    batch_id, batch_ood = _batches(id_data, aux_ood)
    _, breakdown = losses.composite_loss(1, batch_id, batch_ood, small_model, LossWeights())
    assert breakdown.value(LossTerm.NC) is None
    assert breakdown.value(LossTerm.ORTH) is None
    assert breakdown.terms == {LossTerm.CE, LossTerm.OE}


def test_zero_weights_reduce_to_ce(small_model, id_data, aux_ood):
    batch_id, batch_ood = _batches(id_data, aux_ood)
    weights = LossWeights(lam=0.0, alpha=0.0, beta=0.0)
    loss, breakdown = losses.composite_loss(2, batch_id, batch_ood, small_model, weights)
    assert loss.item() == pytest.approx(breakdown.values[LossTerm.CE], rel=1e-12)


def test_missing_ood_batch_is_an_error(small_model, id_data, aux_ood):
    batch_id, _ = _batches(id_data, aux_ood)
    with pytest.raises(DataError):
        losses.composite_loss(1, batch_id, None, small_model, LossWeights())
    _, breakdown = losses.composite_loss(2, batch_id, None, small_model, LossWeights(), LossVariant.VANILLA)
    assert set(breakdown.values) == {LossTerm.CE}


def test_loss_weights_accept_lambda_alias():
    assert LossWeights.model_validate({"lambda": 0.25}).lam == 0.25
    assert LossWeights().weight_of(LossTerm.EUC_OOD) == 1.0


def test_orth_loss_matches_scalar_loop():
    rng = np.random.default_rng(12)
    z, w = rng.normal(size=(6, 8)), rng.normal(size=(3, 8))
    expected = 0.0
    for row in z:
        for weight in w:
            expected += abs(row @ weight) / (np.linalg.norm(row) * np.linalg.norm(weight))
    expected /= z.shape[0] * w.shape[0]
    assert losses.orth_loss(Tensor(z), Tensor(w)).item() == pytest.approx(expected, abs=1e-12)


def test_stage_one_matches_stage_two_without_nc_and_orth(small_model, id_data, aux_ood):
    batch_id, batch_ood = _batches(id_data, aux_ood)
    stage_one, _ = losses.composite_loss(1, batch_id, batch_ood, small_model, LossWeights(lam=0.5, alpha=1.0, beta=1.0))
    stage_two, breakdown = losses.composite_loss(
        2, batch_id, batch_ood, small_model, LossWeights(lam=0.5, alpha=0.0, beta=0.0)
    )
    assert breakdown.terms == {LossTerm.CE, LossTerm.OE, LossTerm.NC, LossTerm.ORTH}
    assert stage_one.item() == pytest.approx(stage_two.item(), rel=1e-12)
