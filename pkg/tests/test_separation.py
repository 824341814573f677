from __future__ import annotations

import numpy as np
import pytest

from app.detection.separation import (
    normalize_rows,
    orthonormal_basis,
    population_separation,
    separation_metrics,
    separation_triplet,
)
from app.exceptions import DataError, DimensionError, NumericError


def test_normalize_rows_zeroes_degenerate_rows():
    rows = normalize_rows(np.array([[3.0, 4.0], [0.0, 0.0]]))
    assert np.allclose(rows, [[0.6, 0.8], [0.0, 0.0]])


def test_orthonormal_basis_drops_dependent_rows():
    vectors = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 0.0]])
    basis = orthonormal_basis(vectors)
    assert basis.shape == (2, 3)
    assert np.allclose(basis @ basis.T, np.eye(2), atol=1e-12)


def test_rank_zero_weights_raise():
    with pytest.raises(NumericError):
        orthonormal_basis(np.zeros((3, 4)))


def test_orthogonal_population():
    weights = np.eye(3, 5)
    features = np.array([[0, 0, 0, 2.0, 0], [0, 0, 0, 0, -1.0]])
    result = separation_metrics(features, np.array([0, 2]), weights)
    assert result.cosine == pytest.approx(0.0, abs=1e-15)
    assert result.euclidean == pytest.approx(np.sqrt(2.0))
    assert result.reconstruction_error == pytest.approx(1.0)
    assert result.count == 2


def test_collapsed_population():
    weights = np.eye(3, 5) * 2.5
    features = np.array([[4.0, 0, 0, 0, 0], [0, 0, 0.1, 0, 0]])
    result = separation_metrics(features, np.array([0, 2]), weights)
    assert result.cosine == pytest.approx(1.0)
    assert result.euclidean == pytest.approx(0.0, abs=1e-12)
    assert result.reconstruction_error == pytest.approx(0.0, abs=1e-12)


def test_reconstruction_matches_least_squares():
    rng = np.random.default_rng(3)
    weights = rng.normal(size=(3, 7))
    features = rng.normal(size=(25, 7))
    labels = rng.integers(0, 3, 25)
    result = separation_metrics(features, labels, weights)

    z = normalize_rows(features)
    w = normalize_rows(weights)
    coefficients = np.linalg.solve(w @ w.T, w @ z.T)
    expected = np.linalg.norm(z - coefficients.T @ w, axis=1).mean()
    assert result.reconstruction_error == pytest.approx(expected, abs=1e-10)


def test_unnormalized_mode_uses_raw_vectors():
    weights = np.eye(2, 3) * 0.5
    features = np.array([[0.6, 0.0, 0.8]])
    raw = separation_metrics(features, np.array([0]), weights, normalize=False)
    assert raw.cosine == pytest.approx(0.3)
    assert raw.euclidean == pytest.approx(np.sqrt(0.65))
    assert raw.reconstruction_error == pytest.approx(0.8)
    assert separation_metrics(features, np.array([0]), weights).cosine == pytest.approx(0.6)


def test_bad_inputs():
    weights = np.eye(3, 5)
    with pytest.raises(DataError):
        separation_metrics(np.zeros((0, 5)), np.zeros(0), weights)
    with pytest.raises(DimensionError):
        separation_metrics(np.ones((2, 4)), np.array([0, 1]), weights)
    with pytest.raises(DataError):
        separation_metrics(np.ones((2, 5)), np.array([0, 3]), weights)


def test_triplet_diff(small_model, id_data, test_ood):
    triplet = separation_triplet(small_model, id_data.features, test_ood.features)
    assert triplet.id.count == id_data.n
    assert triplet.ood.count == test_ood.n
    assert triplet.diff("cosine") == pytest.approx(abs(triplet.id.cosine - triplet.ood.cosine))
    assert [row["metric"] for row in triplet.rows()] == ["euclidean", "cosine", "reconstruction_error"]
    assert population_separation(small_model, id_data.features) == triplet.id
