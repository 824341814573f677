from __future__ import annotations

import hashlib
from enum import Enum
from typing import ClassVar

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LossTerm(str, Enum):
    CE = "ce"
    OE = "oe"
    NC = "nc"
    ORTH = "orth"
    EUC_ID = "euc_id"
    EUC_OOD = "euc_ood"


class LossVariant(str, Enum):
    """Training-loss settings; CE is always on."""

    VANILLA = "vanilla"
    OE_ONLY = "oe-only"
    V1 = "v1"
    V2 = "v2"
    V3 = "v3"
    OURS = "ours"
    EUCLIDEAN = "euclidean"


VARIANT_TERMS: dict[LossVariant, frozenset[LossTerm]] = {
    LossVariant.VANILLA: frozenset(),
    LossVariant.OE_ONLY: frozenset({LossTerm.OE}),
    LossVariant.V1: frozenset({LossTerm.NC, LossTerm.ORTH}),
    LossVariant.V2: frozenset({LossTerm.OE, LossTerm.NC}),
    LossVariant.V3: frozenset({LossTerm.OE, LossTerm.ORTH}),
    LossVariant.OURS: frozenset({LossTerm.OE, LossTerm.NC, LossTerm.ORTH}),
    LossVariant.EUCLIDEAN: frozenset({LossTerm.OE, LossTerm.EUC_ID, LossTerm.EUC_OOD}),
}

# Terms allowed before the switch epoch
STAGE_ONE_TERMS = frozenset({LossTerm.CE, LossTerm.OE})


def active_terms(variant: LossVariant, stage: int) -> frozenset[LossTerm]:
    """Loss terms in effect for a variant during stage 1 or stage 2."""
    if stage not in (1, 2):
        raise ValueError(f"stage must be 1 or 2, got {stage}")
    terms = VARIANT_TERMS[variant] | {LossTerm.CE}
    return terms & STAGE_ONE_TERMS if stage == 1 else terms


def uses_ood(variant: LossVariant) -> bool:
    return bool(VARIANT_TERMS[variant] - {LossTerm.CE, LossTerm.NC, LossTerm.EUC_ID})


class LossWeights(BaseModel):
    lam: float = Field(default=0.5, ge=0, alias="lambda")
    alpha: float = Field(default=1.0, ge=0)
    beta: float = Field(default=1.0, ge=0)

    model_config: ClassVar[ConfigDict] = {
        "title": "LossWeights",
        "populate_by_name": True,
        "frozen": True,
    }

    def weight_of(self, term: LossTerm) -> float:
        if term is LossTerm.CE:
            return 1.0
        if term is LossTerm.OE:
            return self.lam
        if term in (LossTerm.NC, LossTerm.EUC_ID):
            return self.alpha
        return self.beta


class StagePlan(BaseModel):
    total_epochs: int = Field(ge=0)
    switch_epoch: int = Field(ge=0)

    model_config: ClassVar[ConfigDict] = {"frozen": True}

    @model_validator(mode="after")
    def _switch_within_run(self) -> StagePlan:
        if self.switch_epoch > self.total_epochs:
            raise ValueError(
                f"switch_epoch {self.switch_epoch} exceeds total_epochs {self.total_epochs}"
            )
        return self

    def stage_of(self, epoch: int) -> int:
        return 1 if epoch < self.switch_epoch else 2


class TrainConfig(BaseModel):
    """Fine-tuning hyperparameters; defaults are the reference fine-tuning setup."""

    epochs: int = Field(default=50, ge=0)
    switch_epoch: int | None = Field(default=None, ge=0)
    id_batch: int = Field(default=128, ge=1)
    ood_batch: int = Field(default=256, ge=1)
    lr0: float = Field(default=0.07, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    weight_decay: float = Field(default=0.0005, ge=0)
    schedule: str = Field(default="cosine", pattern="^cosine$")
    weights: LossWeights = Field(default_factory=LossWeights)
    seed: int = Field(default=0, ge=0)
    loss_variant: LossVariant = LossVariant.OURS
    warmup_epochs: int = Field(default=20, ge=0)
    warmup_lr: float = Field(default=0.1, gt=0)

    model_config: ClassVar[ConfigDict] = {
        "title": "TrainConfig",
        "populate_by_name": True,
        "frozen": True,
    }

    @model_validator(mode="after")
    def _resolve_switch(self) -> TrainConfig:
        if self.switch_epoch is None:
            object.__setattr__(self, "switch_epoch", self.epochs // 2)
        if self.switch_epoch > self.epochs:
            raise ValueError(f"switch_epoch {self.switch_epoch} exceeds epochs {self.epochs}")
        return self

    @property
    def stage_plan(self) -> StagePlan:
        return StagePlan(total_epochs=self.epochs, switch_epoch=self.switch_epoch)

    def warmup_config(self) -> TrainConfig:
        """CE-only run standing in for the pre-training phase."""
        return self.model_copy(update={
            "epochs": self.warmup_epochs,
            "switch_epoch": self.warmup_epochs,
            "lr0": self.warmup_lr,
            "loss_variant": LossVariant.VANILLA,
        })

    def digest(self) -> bytes:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).digest()
