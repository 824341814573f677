"""
Run configuration files: one ``key = value`` per line, ``#`` starts a comment.

Every key is a field of ``RunConfig``; unknown keys, duplicates and values
that fail validation are rejected with the offending line number.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import ClassVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.config.env_config import Config
from app.exceptions import ConfigurationError
from app.model.report_schema import ScoreKind
from app.types.generator_types import GaussianIdParams, OutlierMode
from app.types.train_types import LossVariant, LossWeights, TrainConfig

logger = logging.getLogger(__name__)

EXTRA_TEST_FILE = "ood_test_{mode}.csv"


def extra_test_file(mode: OutlierMode) -> str:
    return EXTRA_TEST_FILE.format(mode=mode.value)


class RunConfig(BaseModel):
    """Flat experiment description; defaults match the reference fine-tuning setup."""

    # training
    epochs: int = Field(default=50, ge=0)
    switch_epoch: int | None = Field(default=None, ge=0)
    id_batch: int = Field(default=128, ge=1)
    ood_batch: int = Field(default=256, ge=1)
    lr0: float = Field(default=0.07, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    weight_decay: float = Field(default=0.0005, ge=0)
    schedule: str = Field(default="cosine", pattern="^cosine$")
    lam: float = Field(default=0.5, ge=0, alias="lambda")
    alpha: float = Field(default=1.0, ge=0)
    beta: float = Field(default=1.0, ge=0)
    seed: int = Field(default=0, ge=0)
    loss_variant: LossVariant = LossVariant.OURS
    warmup_epochs: int = Field(default=20, ge=0)
    warmup_lr: float = Field(default=0.1, gt=0)
    hidden_dims: list[int] = Field(default_factory=lambda: [64, 16])

    # data generation
    classes: int = Field(default=4, ge=2)
    dim: int = Field(default=16, ge=1)
    n_per_class: int = Field(default=200, ge=1)
    n_test_per_class: int = Field(default=100, ge=1)
    mean_scale: float = Field(default=4.0, gt=0)
    sigma: float = Field(default=0.5, ge=0)
    aux_mode: OutlierMode = OutlierMode.MIXTURE
    test_mode: OutlierMode = OutlierMode.UNIFORM_SHELL
    extra_test_modes: list[OutlierMode] = Field(default_factory=list)
    ood_count: int = Field(default=800, ge=1)
    ood_test_count: int = Field(default=400, ge=1)

    # files
    data_dir: str = "data"
    id_train: str = "id_train.csv"
    id_test: str = "id_test.csv"
    ood_aux: str = "ood_aux.csv"
    ood_test: str = "ood_test.csv"
    output_dir: str = "runs"
    init_checkpoint: str | None = None
    resume_from: str | None = None
    checkpoint_every: int = Field(default=0, ge=0)
    score_kind: str = Field(default="all", pattern="^(all|msp|combined)$")

    model_config: ClassVar[ConfigDict] = {
        "title": "RunConfig",
        "populate_by_name": True,
        "frozen": True,
        "extra": "forbid",
    }

    @field_validator("hidden_dims", mode="before")
    @classmethod
    def _comma_list(cls, value: object) -> object:
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",") if p.strip()]
            if not parts:
                raise ValueError("hidden_dims needs at least one width")
            return [int(p) for p in parts]
        return value

    @field_validator("extra_test_modes", mode="before")
    @classmethod
    def _comma_modes(cls, value: object) -> object:
        if isinstance(value, str):
            return [p.strip() for p in value.split(",") if p.strip()]
        return value

    @field_validator("hidden_dims")
    @classmethod
    def _positive_widths(cls, value: list[int]) -> list[int]:
        if not value or min(value) < 1:
            raise ValueError("hidden_dims must be positive widths")
        return value

    @field_validator("init_checkpoint", "resume_from", mode="before")
    @classmethod
    def _empty_is_none(cls, value: object) -> object:
        return None if isinstance(value, str) and value.strip() == "" else value

    def to_train_config(self) -> TrainConfig:
        """
        Raises:
            ConfigurationError: if the training fields are inconsistent
        """
        try:
            return TrainConfig(
                epochs=self.epochs,
                switch_epoch=self.switch_epoch,
                id_batch=self.id_batch,
                ood_batch=self.ood_batch,
                lr0=self.lr0,
                momentum=self.momentum,
                weight_decay=self.weight_decay,
                schedule=self.schedule,
                weights=LossWeights(lam=self.lam, alpha=self.alpha, beta=self.beta),
                seed=self.seed,
                loss_variant=self.loss_variant,
                warmup_epochs=self.warmup_epochs,
                warmup_lr=self.warmup_lr,
            )
        except ValidationError as e:
            raise ConfigurationError(f"Invalid training config: {str(e)}") from e

    def id_params(self) -> GaussianIdParams:
        return GaussianIdParams(
            classes=self.classes,
            dim=self.dim,
            n_per_class=self.n_per_class,
            mean_scale=self.mean_scale,
            sigma=self.sigma,
        )

    def layer_dims(self, input_width: int) -> list[int]:
        return [input_width] + list(self.hidden_dims)

    def data_path(self, name: str) -> Path:
        """A dataset path; relative file names resolve under ``data_dir``."""
        path = Path(getattr(self, name))
        return path if path.is_absolute() else Path(self.data_dir) / path

    def test_set_paths(self) -> list[Path]:
        """The primary test OOD file followed by one file per extra test mode."""
        extras = [Path(self.data_dir) / extra_test_file(mode) for mode in self.extra_test_modes]
        return [self.data_path("ood_test")] + extras

    def resolve_output_dir(self, config: Config | None = None) -> Path:
        config = config or Config()
        return Path(config.OUTPUT_DIR or self.output_dir)


def parse_run_config(text: str, source: str = "<config>", **overrides: object) -> RunConfig:
    """
    Parse ``key = value`` text into a RunConfig; ``overrides`` win over the file.

    Raises:
        ConfigurationError: on malformed lines, duplicate or unknown keys, invalid values
    """
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{number}: missing key")
        if key in values:
            raise ConfigurationError(f"{source}:{number}: duplicate key {key!r} (first set on line {lines[key]})")
        values[key] = value
        lines[key] = number

    merged: dict[str, object] = dict(values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        error = e.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else "?"
        where = f"{source}:{lines[key]}" if key in lines else source
        raise ConfigurationError(f"{where}: {key}: {error['msg']}") from e


def load_run_config(path: str | Path | None, **overrides: object) -> RunConfig:
    """
    Load a config file, or defaults plus overrides when ``path`` is None.

    Raises:
        ConfigurationError: if the file is unreadable or invalid
    """
    if path is None:
        return parse_run_config("", "<defaults>", **overrides)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Failed to read config {path}: {str(e)}") from e
    logger.info(f"Loaded run config from {path}")
    return parse_run_config(text, str(path), **overrides)
