from __future__ import annotations

from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.types.generator_types import OutlierRole


def _as_feature_matrix(value: object) -> np.ndarray:
    features = np.array(value, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
        raise ValueError(f"features must be a non-empty n x d matrix, got shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise ValueError("features contain NaN or Inf")
    features.flags.writeable = False
    return features


class LabeledDataset(BaseModel):
    """In-distribution samples with class labels in [0, C)."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    model_config: ClassVar[ConfigDict] = {
        "title": "LabeledDataset",
        "arbitrary_types_allowed": True,
        "frozen": True,
    }

    @field_validator("features", mode="before")
    @classmethod
    def _check_features(cls, value: object) -> np.ndarray:
        return _as_feature_matrix(value)

    @field_validator("labels", mode="before")
    @classmethod
    def _check_labels(cls, value: object) -> np.ndarray:
        labels = np.array(value)
        if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be a 1-D integer array")
        labels = labels.astype(np.int64)
        labels.flags.writeable = False
        return labels

    @model_validator(mode="after")
    def _labels_match(self) -> LabeledDataset:
        if self.labels.shape[0] != self.features.shape[0]:
            raise ValueError(f"{self.labels.shape[0]} labels for {self.features.shape[0]} samples")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        return self

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])


class OutlierDataset(BaseModel):
    """Unlabeled OOD samples; the role is fixed at construction."""

    features: np.ndarray
    role: OutlierRole

    model_config: ClassVar[ConfigDict] = {
        "title": "OutlierDataset",
        "arbitrary_types_allowed": True,
        "frozen": True,
    }

    @field_validator("features", mode="before")
    @classmethod
    def _check_features(cls, value: object) -> np.ndarray:
        return _as_feature_matrix(value)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])
