from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from app.config.run_config import parse_run_config
from app.controller.data_controller import DataController
from app.data.batching import OodStream, batches
from app.data.generators import class_means, gen_gaussian_id, gen_outliers
from app.data.rng import Rng
from app.exceptions import ConfigurationError
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.types.generator_types import OutlierMode, OutlierParams, OutlierRole


def test_gaussian_id_is_balanced():
    data = gen_gaussian_id(2, 8, 50, 4.0, 0.5, seed=7)
    assert data.n == 100
    assert data.d == 8
    assert data.num_classes == 2
    assert Counter(data.labels.tolist()) == {0: 50, 1: 50}


def test_gaussian_id_is_deterministic():
    a = gen_gaussian_id(3, 6, 10, 4.0, 0.5, seed=5)
    b = gen_gaussian_id(3, 6, 10, 4.0, 0.5, seed=5)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_splits_share_means_but_not_samples():
    train = gen_gaussian_id(3, 6, 10, 4.0, 0.5, seed=5)
    test = gen_gaussian_id(3, 6, 10, 4.0, 0.5, seed=5, split=1)
    assert not np.array_equal(train.features, test.features)
    zero_spread = gen_gaussian_id(3, 6, 2, 4.0, 0.0, seed=5, split=1)
    assert np.array_equal(zero_spread.features[::2], class_means(3, 6, 4.0, 5))


def test_zero_sigma_collapses_to_means():
    data = gen_gaussian_id(3, 6, 4, 4.0, 0.0, seed=2)
    means = class_means(3, 6, 4.0, 2)
    assert np.array_equal(data.features, means[data.labels])
    assert np.linalg.norm(means, axis=1) == pytest.approx(np.full(3, 4.0))


@pytest.mark.parametrize("C, d", [(3, 3), (4, 2), (1, 8)])
def test_invalid_class_geometry_is_rejected(C, d):
    with pytest.raises(ConfigurationError):
        gen_gaussian_id(C, d, 5, 4.0, 0.5, seed=0)


def test_uniform_shell_lies_outside_every_id_ball():
    mean_scale, sigma = 4.0, 0.5
    means = class_means(4, 16, mean_scale, 9)
    shell = gen_outliers(16, 500, OutlierMode.UNIFORM_SHELL, OutlierParams(), seed=9, role=OutlierRole.TEST)
    distances = np.linalg.norm(shell.features[:, None, :] - means[None, :, :], axis=2)
    assert distances.min() > 3 * sigma


@pytest.mark.parametrize("mode", list(OutlierMode))
def test_outliers_are_deterministic(mode):
    means = class_means(3, 5, 4.0, 4)
    a = gen_outliers(5, 12, mode, OutlierParams(), seed=4, role=OutlierRole.AUXILIARY, id_means=means)
    b = gen_outliers(5, 12, mode, OutlierParams(), seed=4, role=OutlierRole.AUXILIARY, id_means=means)
    assert isinstance(a, OutlierDataset)
    assert a.features.shape == (12, 5)
    assert np.array_equal(a.features, b.features)


def test_auxiliary_and_test_draws_differ():
    aux = gen_outliers(5, 12, OutlierMode.MIXTURE, OutlierParams(), seed=4, role=OutlierRole.AUXILIARY)
    test = gen_outliers(5, 12, OutlierMode.MIXTURE, OutlierParams(), seed=4, role=OutlierRole.TEST)
    assert aux.role is OutlierRole.AUXILIARY
    assert test.role is OutlierRole.TEST
    assert not np.array_equal(aux.features, test.features)


def test_near_id_centers_sit_between_class_means():
    means = class_means(4, 16, 4.0, 3)
    params = OutlierParams(near_sigma=0.0)
    near = gen_outliers(16, 50, OutlierMode.NEAR_ID, params, seed=3, role=OutlierRole.TEST, id_means=means)
    assert np.linalg.norm(near.features, axis=1) == pytest.approx(np.full(50, 4.0))
    distances = np.linalg.norm(near.features[:, None, :] - means[None, :, :], axis=2)
    first, second = np.triu_indices(4, 1)
    # every row is equidistant from the two classes it was built from
    gaps = np.abs(distances[:, first] - distances[:, second]).min(axis=1)
    assert np.all(gaps < 1e-9)


def test_near_id_outliers_are_closer_than_the_shell():
    means = class_means(4, 16, 4.0, 5)
    near = gen_outliers(16, 200, OutlierMode.NEAR_ID, OutlierParams(), seed=5, role=OutlierRole.TEST, id_means=means)
    shell = gen_outliers(16, 200, OutlierMode.UNIFORM_SHELL, OutlierParams(), seed=5, role=OutlierRole.TEST)

    def nearest(features):
        return np.linalg.norm(features[:, None, :] - means[None, :, :], axis=2).min(axis=1).mean()

    assert nearest(near.features) < nearest(shell.features)


def test_near_id_needs_class_means():
    with pytest.raises(ConfigurationError):
        gen_outliers(6, 5, OutlierMode.NEAR_ID, OutlierParams(), seed=0, role=OutlierRole.TEST)
    with pytest.raises(ConfigurationError):
        gen_outliers(6, 5, OutlierMode.NEAR_ID, OutlierParams(), seed=0, role=OutlierRole.TEST, id_means=np.ones((1, 6)))


def test_mixture_centers_avoid_the_id_sphere():
    params = OutlierParams(sigma=0.0)
    mixture = gen_outliers(16, 300, OutlierMode.MIXTURE, params, seed=2, role=OutlierRole.AUXILIARY)
    norms = np.linalg.norm(mixture.features, axis=1)
    assert norms.min() >= params.component_min_radius - 1e-9
    assert norms.max() <= params.component_max_radius + 1e-9
    assert len(np.unique(mixture.features, axis=0)) > 1


def test_mixture_radius_range_must_be_ordered():
    with pytest.raises(ValueError):
        OutlierParams(component_min_radius=9.0, component_max_radius=8.0)


def test_single_outlier():
    one = gen_outliers(3, 1, OutlierMode.SHIFTED_GAUSSIAN, OutlierParams(), seed=0, role=OutlierRole.TEST)
    assert one.n == 1


def test_bad_outlier_settings():
    with pytest.raises(ConfigurationError):
        gen_outliers(3, 5, "spiral", OutlierParams(), seed=0, role=OutlierRole.TEST)
    with pytest.raises(ConfigurationError):
        gen_outliers(3, 0, OutlierMode.MIXTURE, OutlierParams(), seed=0, role=OutlierRole.TEST)


def _ten() -> LabeledDataset:
    return LabeledDataset(features=np.arange(20.0).reshape(10, 2), labels=np.arange(10) % 2, num_classes=2)


def test_batch_sizes():
    assert [len(b.labels) for b in batches(_ten(), 4, Rng(0))] == [4, 4, 2]
    assert [len(b.labels) for b in batches(_ten(), 25, Rng(0))] == [10]


def test_epoch_covers_dataset_exactly_once():
    seen = np.concatenate([b.features[:, 0] for b in batches(_ten(), 3, Rng(1))])
    assert sorted(seen.tolist()) == sorted(_ten().features[:, 0].tolist())


def test_same_seed_same_order():
    first = [b.features for b in batches(_ten(), 4, Rng(8))]
    second = [b.features for b in batches(_ten(), 4, Rng(8))]
    assert all(np.array_equal(a, b) for a, b in zip(first, second))


def test_ood_stream_wraps_and_restores():
    outliers = OutlierDataset(features=np.arange(10.0).reshape(5, 2), role=OutlierRole.AUXILIARY)
    stream = OodStream(outliers, 3, Rng(2))
    first, second = stream.next_batch(), stream.next_batch()
    assert first.features.shape == (3, 2)
    assert second.features.shape == (3, 2)
    # the first permutation is used up before the second is drawn
    assert len(set(first.features[:, 0].tolist()) | set(second.features[:2, 0].tolist())) == 5

    state = stream.get_state()
    rng_state = stream.rng.get_state()
    expected = stream.next_batch()
    restored = OodStream(outliers, 3, Rng(2))
    restored.rng.set_state(rng_state)
    restored.set_state(state)
    assert np.array_equal(restored.next_batch().features, expected.features)


def test_rng_state_round_trip():
    rng = Rng(12, 3)
    rng.normal(5)
    state = rng.get_state()
    expected = rng.normal(4)
    restored = Rng(0)
    restored.set_state(state)
    assert restored.seed == 12
    assert np.array_equal(restored.normal(4), expected)


@pytest.mark.parametrize(
    "modes",
    [
        "aux_mode = mixture\ntest_mode = mixture\n",
        "aux_mode = mixture\nextra_test_modes = near-id, mixture\n",
        "extra_test_modes = near-id, near-id\n",
        "extra_test_modes = uniform-shell\n",
    ],
)
def test_generation_rejects_repeated_outlier_modes(tmp_path, modes):
    run_config = parse_run_config(modes + "classes = 3\ndim = 6\nn_per_class = 4\n")
    with pytest.raises(ConfigurationError):
        DataController().generate(run_config, tmp_path)
    assert not any(tmp_path.iterdir())


def test_generation_writes_extra_test_sets(tmp_path):
    run_config = parse_run_config("classes = 3\ndim = 6\nn_per_class = 4\nood_test_count = 7\nextra_test_modes = near-id\n")
    written = DataController().generate(run_config, tmp_path)
    assert set(written) == {"id_train", "id_test", "ood_aux", "ood_test", "ood_test_near-id"}
    near = DataController().load_outliers(written["ood_test_near-id"], OutlierRole.TEST)
    assert near.n == 7
    assert run_config.test_set_paths()[1].name == "ood_test_near-id.csv"
