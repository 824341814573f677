"""
Synthetic ID and OOD data.

ID data: C isotropic Gaussian clusters whose means sit on the sphere of radius
``mean_scale`` in random directions (drawn once per seed, shared by every
split). Far OOD data sits well outside that sphere as a single blob, a
uniform shell or a mixture of blobs; near OOD data sits on the sphere between
pairs of class means.
"""

from __future__ import annotations

import logging

import numpy as np

from app.data.rng import Rng
from app.exceptions import ConfigurationError
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.types.generator_types import OutlierMode, OutlierParams, OutlierRole

logger = logging.getLogger(__name__)

_MEANS_STREAM = 0
_SPLIT_STREAM_BASE = 1
_OUTLIER_STREAM = {OutlierRole.AUXILIARY: 100, OutlierRole.TEST: 200}


def _unit_rows(raw: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return raw / np.where(norms > 0, norms, 1.0)


def class_means(C: int, d: int, mean_scale: float, seed: int) -> np.ndarray:
    return mean_scale * _unit_rows(Rng(seed, _MEANS_STREAM).normal((C, d)))


def gen_gaussian_id(
    C: int,
    d: int,
    n_per_class: int,
    mean_scale: float,
    sigma: float,
    seed: int,
    split: int = 0,
) -> LabeledDataset:
    """
    Generate a class-major labeled dataset of C Gaussian clusters.

    ``split`` picks an independent sample draw around the same means, so
    split 0 and split 1 serve as train and test sets.
    """
    if C < 2:
        raise ConfigurationError(f"need at least 2 classes, got {C}")
    if d <= C:
        raise ConfigurationError(
            f"feature dimension d={d} must exceed class count C={C} so that "
            f"directions orthogonal to every class weight exist"
        )
    if n_per_class < 1 or sigma < 0 or mean_scale <= 0:
        raise ConfigurationError("n_per_class must be >= 1, sigma >= 0 and mean_scale > 0")

    means = class_means(C, d, mean_scale, seed)
    noise = Rng(seed, _SPLIT_STREAM_BASE + split).normal((C * n_per_class, d))
    labels = np.repeat(np.arange(C), n_per_class)
    features = means[labels] + sigma * noise
    logger.debug(f"Generated {C * n_per_class} ID samples (C={C}, d={d}, seed={seed}, split={split})")
    return LabeledDataset(features=features, labels=labels, num_classes=C)


def _near_id_centers(id_means: np.ndarray) -> np.ndarray:
    # one center per pair of classes, rescaled onto the sphere of the means
    first, second = np.triu_indices(id_means.shape[0], 1)
    midpoints = (id_means[first] + id_means[second]) / 2.0
    radius = np.linalg.norm(id_means, axis=1).mean()
    return radius * _unit_rows(midpoints)


def gen_outliers(
    d: int,
    m: int,
    mode: OutlierMode | str,
    params: OutlierParams,
    seed: int,
    role: OutlierRole | str,
    id_means: np.ndarray | None = None,
) -> OutlierDataset:
    """
    Generate m unlabeled OOD samples of width d.

    ``id_means`` (C x d, as from ``class_means``) is required by the near-id
    mode and ignored by the others.

    Raises:
        ConfigurationError: unknown mode or role, m < 1, or near-id without
            at least two ID means of width d
    """
    try:
        mode = OutlierMode(mode)
        role = OutlierRole(role)
    except ValueError as e:
        raise ConfigurationError(f"Unknown outlier setting: {e}") from e
    if m < 1:
        raise ConfigurationError(f"need at least one outlier, got m={m}")

    rng = Rng(seed, _OUTLIER_STREAM[role])
    if mode is OutlierMode.SHIFTED_GAUSSIAN:
        center = params.shift * _unit_rows(rng.normal((1, d)))
        features = center + params.sigma * rng.normal((m, d))
    elif mode is OutlierMode.UNIFORM_SHELL:
        directions = _unit_rows(rng.normal((m, d)))
        radii = rng.uniform(params.inner_radius, params.outer_radius, m)
        features = directions * radii[:, None]
    elif mode is OutlierMode.MIXTURE:
        radii = rng.uniform(params.component_min_radius, params.component_max_radius, params.components)
        centers = radii[:, None] * _unit_rows(rng.normal((params.components, d)))
        picks = rng.integers(params.components, m)
        features = centers[picks] + params.sigma * rng.normal((m, d))
    else:
        if id_means is None or id_means.ndim != 2 or id_means.shape[0] < 2 or id_means.shape[1] != d:
            raise ConfigurationError(f"near-id outliers need at least two ID class means of width {d}")
        centers = _near_id_centers(np.asarray(id_means, dtype=np.float64))
        picks = rng.integers(centers.shape[0], m)
        features = centers[picks] + params.near_sigma * rng.normal((m, d))

    logger.debug(f"Generated {m} {role.value} outliers with mode {mode.value}")
    return OutlierDataset(features=features, role=role)
