from __future__ import annotations

import numpy as np
import pytest

from app.detection.projection import principal_ood_direction, project_features, projection_axes
from app.exceptions import ConfigurationError, DimensionError, NumericError


def test_principal_direction_matches_eigh():
    rng = np.random.default_rng(0)
    features = rng.normal(size=(200, 6)) * np.array([3.0, 1.0, 0.5, 0.5, 0.2, 0.1]) + 2.0
    direction = principal_ood_direction(features)

    centered = features - features.mean(axis=0)
    values, vectors = np.linalg.eigh(centered.T @ centered / (features.shape[0] - 1))
    expected = vectors[:, -1]
    expected = expected if expected[np.argmax(np.abs(expected))] > 0 else -expected

    assert direction.unique
    assert direction.eigenvalue == pytest.approx(values[-1], rel=1e-6)
    assert np.allclose(direction.vector, expected, atol=1e-6)
    assert np.linalg.norm(direction.vector) == pytest.approx(1.0)


def test_isotropic_cloud_is_not_unique():
    eye = np.eye(4)
    direction = principal_ood_direction(np.vstack([eye, -eye]))
    assert not direction.unique


def test_degenerate_ood_inputs():
    with pytest.raises(NumericError):
        principal_ood_direction(np.ones((5, 3)))
    with pytest.raises(DimensionError):
        principal_ood_direction(np.ones((1, 3)))


def test_projection_axes_are_orthonormal():
    rng = np.random.default_rng(1)
    weights = rng.normal(size=(4, 6))
    axes = projection_axes(weights, rng.normal(size=6))
    assert axes.shape == (3, 6)
    assert np.allclose(axes @ axes.T, np.eye(3), atol=1e-12)
    assert axes[0] == pytest.approx(weights[0] / np.linalg.norm(weights[0]))


def test_projection_axis_failures():
    with pytest.raises(NumericError):
        projection_axes(np.array([[1.0, 2.0, 0.0], [-2.0, -4.0, 0.0]]))
    with pytest.raises(NumericError):
        projection_axes(np.eye(2, 3), np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ConfigurationError):
        projection_axes(np.ones((1, 3)))


def test_project_features_coordinates():
    weights = np.eye(3, 4)
    features = np.array([[2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 5.0], [3.0, 4.0, 0.0, 0.0]])
    coords = project_features(features, weights)
    assert coords == pytest.approx(np.array([[1.0, 0.0], [0.0, 0.0], [0.6, 0.8]]))

    with_ood = project_features(features, weights, np.array([0.0, 0.0, 0.0, 1.0]))
    assert with_ood.shape == (3, 3)
    assert with_ood[1] == pytest.approx([0.0, 0.0, 1.0])


def test_projection_never_lengthens_unit_features():
    rng = np.random.default_rng(2)
    coords = project_features(rng.normal(size=(50, 6)), rng.normal(size=(3, 6)), rng.normal(size=6))
    assert np.all(np.linalg.norm(coords, axis=1) <= 1.0 + 1e-12)


def _eigh_top(features: np.ndarray) -> tuple[np.ndarray, float]:
    centered = features - features.mean(axis=0)
    values, vectors = np.linalg.eigh(centered.T @ centered / (features.shape[0] - 1))
    top = vectors[:, -1]
    return (top if top[np.argmax(np.abs(top))] > 0 else -top), values[-1]


def test_block_covariance_finds_the_tied_axis():
    # dims 0 and 1 move together, so the heaviest single column is the second eigenvector
    features = np.array([[0.5, 0.5, 0.6], [-0.5, -0.5, 0.6], [0.5, 0.5, -0.6], [-0.5, -0.5, -0.6]])
    expected, top = _eigh_top(features)
    direction = principal_ood_direction(features)
    assert direction.unique
    assert direction.eigenvalue == pytest.approx(top, rel=1e-8)
    assert direction.eigenvalue == pytest.approx(2.0 / 3.0, rel=1e-8)
    assert np.allclose(direction.vector, expected, atol=1e-6)
    assert np.allclose(direction.vector, [np.sqrt(0.5), np.sqrt(0.5), 0.0], atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_random_covariances_match_eigh(seed):
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(60, 5)) @ rng.normal(size=(5, 5))
    expected, top = _eigh_top(features)
    direction = principal_ood_direction(features)
    assert direction.eigenvalue == pytest.approx(top, rel=1e-6)
    if direction.unique:
        assert np.allclose(direction.vector, expected, atol=1e-4)
