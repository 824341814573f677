"""
Feature separation degree of a population against the FC class weights.

Features and class weights are l2-normalized first, so cosine lies in
[-1, 1], euclidean in [0, 2] and reconstruction error in [0, 1].
"""

from __future__ import annotations

import logging

import numpy as np

from app.exceptions import DataError, DimensionError, NumericError
from app.model.report_schema import PopulationSeparation, SeparationTriplet
from app.nn.mlp import MlpClassifier
from app.tensor.ops import NORM_EPS

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10


def normalize_rows(vectors: np.ndarray, eps: float = NORM_EPS) -> np.ndarray:
    """Row-wise v / ||v||; rows with norm <= eps become zero rows."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    safe = np.where(norms > eps, norms, 1.0)
    return np.where(norms > eps, vectors / safe, 0.0)


def orthonormal_basis(vectors: np.ndarray, tol: float = RESIDUAL_TOLERANCE) -> np.ndarray:
    """
    Orthonormal rows spanning the given rows, by modified Gram-Schmidt.

    Each direction is orthogonalized twice against the accepted basis and
    dropped when its residual norm falls below ``tol``.

    Raises:
        NumericError: if no direction survives (rank-0 input)
    """
    basis: list[np.ndarray] = []
    for v in np.atleast_2d(np.asarray(vectors, dtype=np.float64)):
        residual = v.copy()
        for _ in range(2):
            for e in basis:
                residual -= (residual @ e) * e
        norm = np.linalg.norm(residual)
        if norm < tol:
            continue
        basis.append(residual / norm)
    if not basis:
        raise NumericError("weight matrix has rank 0: no direction to span")
    return np.vstack(basis)


def separation_metrics(
    features: np.ndarray,
    predicted_labels: np.ndarray,
    class_weights: np.ndarray,
    normalize: bool = True,
) -> PopulationSeparation:
    """Mean euclidean distance, cosine to the predicted class weight and subspace residual."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = np.asarray(predicted_labels, dtype=np.int64).reshape(-1)
    weights = np.atleast_2d(np.asarray(class_weights, dtype=np.float64))
    if features.shape[0] == 0:
        raise DataError("cannot measure separation of an empty population")
    if features.shape[1] != weights.shape[1]:
        raise DimensionError(f"feature width {features.shape[1]} does not match weight width {weights.shape[1]}")
    if labels.size != features.shape[0]:
        raise DimensionError(f"{labels.size} labels for {features.shape[0]} features")
    if labels.min() < 0 or labels.max() >= weights.shape[0]:
        raise DataError(f"predicted labels must lie in [0, {weights.shape[0] - 1}]")

    if normalize:
        features = normalize_rows(features)
        weights = normalize_rows(weights)
    basis = orthonormal_basis(weights)
    target = weights[labels]
    residual = features - (features @ basis.T) @ basis
    return PopulationSeparation(
        euclidean=float(np.linalg.norm(features - target, axis=1).mean()),
        cosine=float(np.einsum("ij,ij->i", features, target).mean()),
        reconstruction_error=float(np.linalg.norm(residual, axis=1).mean()),
        count=features.shape[0],
    )


def population_separation(model: MlpClassifier, x: np.ndarray) -> PopulationSeparation:
    out = model.forward(x)
    predicted = np.argmax(out.logits.data, axis=1)
    return separation_metrics(out.features.data, predicted, model.fc_weight)


def separation_triplet(model: MlpClassifier, id_x: np.ndarray, ood_x: np.ndarray) -> SeparationTriplet:
    triplet = SeparationTriplet(id=population_separation(model, id_x), ood=population_separation(model, ood_x))
    logger.debug(f"Separation diff: cosine={triplet.diff('cosine'):.6f} euclidean={triplet.diff('euclidean'):.6f}")
    return triplet
