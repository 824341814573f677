from __future__ import annotations

import numpy as np
import pytest

from app.data.generators import gen_gaussian_id, gen_outliers
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.nn import mlp
from app.types.generator_types import OutlierMode, OutlierParams, OutlierRole
from app.types.train_types import LossVariant, TrainConfig


@pytest.fixture
def id_data() -> LabeledDataset:
    return gen_gaussian_id(3, 8, 20, 4.0, 0.5, seed=1)


@pytest.fixture
def id_test_data() -> LabeledDataset:
    return gen_gaussian_id(3, 8, 10, 4.0, 0.5, seed=1, split=1)


@pytest.fixture
def aux_ood() -> OutlierDataset:
    return gen_outliers(8, 40, OutlierMode.SHIFTED_GAUSSIAN, OutlierParams(), seed=1, role=OutlierRole.AUXILIARY)


@pytest.fixture
def test_ood() -> OutlierDataset:
    return gen_outliers(8, 30, OutlierMode.UNIFORM_SHELL, OutlierParams(), seed=1, role=OutlierRole.TEST)


@pytest.fixture
def small_model() -> mlp.MlpClassifier:
    return mlp.init([8, 16, 6], 3, seed=0)


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        epochs=4,
        switch_epoch=2,
        id_batch=16,
        ood_batch=20,
        lr0=0.05,
        seed=3,
        loss_variant=LossVariant.OURS,
        warmup_epochs=2,
    )


def assert_params_equal(left: mlp.MlpClassifier, right: mlp.MlpClassifier, tol: float = 0.0) -> None:
    for a, b in zip(left.parameters(), right.parameters()):
        if tol == 0.0:
            assert np.array_equal(a, b)
        else:
            assert np.max(np.abs(a - b)) <= tol
