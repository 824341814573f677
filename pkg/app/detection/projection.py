"""Coordinates of features in the plane of two class weights, plus an optional OOD axis."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from app.data.rng import Rng
from app.detection.separation import RESIDUAL_TOLERANCE, normalize_rows
from app.exceptions import ConfigurationError, DimensionError, NumericError

logger = logging.getLogger(__name__)

POWER_TOLERANCE = 1e-10
POWER_MAX_ITER = 10_000
GAP_TOLERANCE = 1e-8
START_PERTURBATION = 1e-3
_START_STREAM = 7
_DEFLATION_STREAM = 8


@dataclass(frozen=True)
class PrincipalDirection:
    vector: np.ndarray
    eigenvalue: float
    unique: bool
    iterations: int


def _fix_sign(v: np.ndarray) -> np.ndarray:
    return v if v[np.argmax(np.abs(v))] > 0 else -v


def _start_vector(d: int) -> np.ndarray:
    # dense and fixed: ones plus a small seeded perturbation
    x = np.ones(d) + START_PERTURBATION * Rng(0, _START_STREAM).normal(d)
    return x / np.linalg.norm(x)


def _power_iteration(
    cov: np.ndarray, tol: float, max_iter: int, start: np.ndarray | None = None
) -> tuple[np.ndarray, float, int]:
    x = _start_vector(cov.shape[0]) if start is None else start / np.linalg.norm(start)
    lam = float(x @ cov @ x)
    for it in range(1, max_iter + 1):
        y = cov @ x
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            return x, 0.0, it
        x = y / y_norm
        lam_new = float(x @ cov @ x)
        converged = abs(lam_new - lam) <= tol * abs(lam_new)
        lam = lam_new
        if converged and np.linalg.norm(cov @ x - lam * x) <= tol * abs(lam):
            return x, lam, it
    logger.warning(f"Power iteration hit the {max_iter} iteration cap")
    return x, lam, max_iter


def principal_ood_direction(
    ood_features: np.ndarray, tol: float = POWER_TOLERANCE, max_iter: int = POWER_MAX_ITER
) -> PrincipalDirection:
    """
    Top eigenvector of the mean-centered OOD feature covariance.

    The sign is fixed so the largest-magnitude component is positive. A
    second eigenvalue within ``GAP_TOLERANCE`` of the first marks the
    direction as non-unique. When deflation uncovers an eigenvalue larger
    than the one found first, iteration continues from that eigenvector.

    Raises:
        DimensionError: if fewer than two samples are given
        NumericError: if the covariance is zero
    """
    features = np.atleast_2d(np.asarray(ood_features, dtype=np.float64))
    if features.shape[0] < 2:
        raise DimensionError("principal direction needs at least two OOD samples")
    centered = features - features.mean(axis=0)
    cov = centered.T @ centered / (features.shape[0] - 1)
    if not np.any(np.abs(cov) > 0):
        raise NumericError("OOD features have zero covariance: all samples are identical")

    d = cov.shape[0]
    vector, eigenvalue, iterations = _power_iteration(cov, tol, max_iter)
    second = 0.0
    for _ in range(d):
        deflated = cov - eigenvalue * np.outer(vector, vector)
        if not np.any(np.abs(deflated) > tol * eigenvalue):
            second = 0.0
            break
        other, second, extra = _power_iteration(deflated, tol, max_iter, start=Rng(0, _DEFLATION_STREAM).normal(d))
        iterations += extra
        if second <= eigenvalue * (1.0 + GAP_TOLERANCE):
            break
        logger.debug(f"Deflation found eigenvalue {second:.6g} above {eigenvalue:.6g}; restarting from it")
        vector, eigenvalue, extra = _power_iteration(cov, tol, max_iter, start=other)
        iterations += extra
    unique = eigenvalue - abs(second) > GAP_TOLERANCE * eigenvalue
    if not unique:
        logger.warning(f"Top OOD eigenvalue {eigenvalue:.6g} is not separated from the next ({second:.6g})")
    return PrincipalDirection(vector=_fix_sign(vector), eigenvalue=eigenvalue, unique=unique, iterations=iterations)


def projection_axes(class_weights: np.ndarray, ood_direction: np.ndarray | None = None) -> np.ndarray:
    """
    Orthonormal axes (e1, e2[, e3]) as rows.

    Raises:
        ConfigurationError: if there are fewer than two classes
        NumericError: if w1 and w2 are parallel or the OOD direction lies in their plane
    """
    weights = np.atleast_2d(np.asarray(class_weights, dtype=np.float64))
    if weights.shape[0] < 2:
        raise ConfigurationError("projection needs at least two class weights")
    candidates = [weights[0], weights[1]] + ([np.asarray(ood_direction, dtype=np.float64)] if ood_direction is not None else [])
    axes: list[np.ndarray] = []
    for k, v in enumerate(candidates):
        if v.shape != weights[0].shape:
            raise DimensionError(f"axis {k + 1} has shape {v.shape}, expected {weights[0].shape}")
        scale = np.linalg.norm(v)
        residual = v.copy()
        for _ in range(2):
            for e in axes:
                residual -= (residual @ e) * e
        norm = np.linalg.norm(residual)
        if scale == 0 or norm < RESIDUAL_TOLERANCE * scale:
            which = "w1 and w2 are parallel" if k < 2 else "OOD direction lies in the span of w1 and w2"
            raise NumericError(f"cannot orthonormalize projection axes: {which}")
        axes.append(residual / norm)
    return np.vstack(axes)


def project_features(
    features: np.ndarray,
    class_weights: np.ndarray,
    ood_direction: np.ndarray | None = None,
    normalize: bool = True,
) -> np.ndarray:
    """Coordinates n x 2, or n x 3 when an OOD direction is given."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    axes = projection_axes(class_weights, ood_direction)
    if features.shape[1] != axes.shape[1]:
        raise DimensionError(f"feature width {features.shape[1]} does not match weight width {axes.shape[1]}")
    if normalize:
        features = normalize_rows(features)
    return features @ axes.T
