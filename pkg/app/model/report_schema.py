from __future__ import annotations

from enum import Enum
from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class ScoreKind(str, Enum):
    MSP = "msp"
    COMBINED = "combined"


class TrainLogRecord(BaseModel):
    """One completed epoch. Loss components not in effect are None."""

    epoch: int
    lr: float
    ce: float | None = None
    oe: float | None = None
    nc: float | None = None
    orth: float | None = None
    id_acc: float
    aux_orth_mean: float | None = None
    id_nc_cos: float

    __csv_columns__: ClassVar[tuple[str, ...]] = (
        "epoch", "lr", "ce", "oe", "nc", "orth", "id_acc", "aux_orth_mean", "id_nc_cos",
    )


class TrainLog(BaseModel):
    records: list[TrainLogRecord] = []

    def append(self, record: TrainLogRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)


class ScoreSeries(BaseModel):
    id_scores: np.ndarray
    ood_scores: np.ndarray
    score_kind: ScoreKind

    model_config: ClassVar[ConfigDict] = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("id_scores", "ood_scores", mode="before")
    @classmethod
    def _finite_vector(cls, value: object) -> np.ndarray:
        scores = np.array(value, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        return scores


class DetectionReport(BaseModel):
    dataset: str
    score_kind: ScoreKind
    fpr95: float = Field(ge=0, le=1)
    auroc: float = Field(ge=0, le=1)
    threshold: float

    __csv_columns__: ClassVar[tuple[str, ...]] = ("score_kind", "dataset", "fpr95", "auroc", "threshold")


class PopulationSeparation(BaseModel):
    """Mean separation metrics of one population against its predicted class weights."""

    euclidean: float = Field(ge=0)
    cosine: float = Field(ge=-1 - 1e-9, le=1 + 1e-9)
    reconstruction_error: float = Field(ge=0)
    count: int = Field(ge=1)


class SeparationTriplet(BaseModel):
    id: PopulationSeparation
    ood: PopulationSeparation

    __metrics__: ClassVar[tuple[str, ...]] = ("euclidean", "cosine", "reconstruction_error")

    def diff(self, metric: str) -> float:
        return abs(getattr(self.id, metric) - getattr(self.ood, metric))

    def rows(self) -> list[dict[str, object]]:
        return [
            {
                "metric": metric,
                "id_mean": getattr(self.id, metric),
                "ood_mean": getattr(self.ood, metric),
                "diff": self.diff(metric),
            }
            for metric in self.__metrics__
        ]
