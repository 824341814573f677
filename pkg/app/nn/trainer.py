"""
Two-stage fine-tuning loop.

Stage 1 (epoch < switch_epoch) optimizes CE + lambda OE, stage 2 adds the
NC and Orth terms. Each ID batch is paired with the next batch of an OOD
stream that cycles independently at its own batch size. All randomness
flows from one seeded stream, so a run is a pure function of
(config, data, initial model) and resumes bit-identically from a checkpoint.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.data.batching import LabeledBatch, OodStream, batches
from app.data.rng import Rng
from app.exceptions import ConfigMismatchError, ConfigurationError, DataError
from app.model.checkpoint_schema import CheckpointMeta
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.model.report_schema import TrainLog, TrainLogRecord
from app.nn import losses
from app.nn.mlp import MlpClassifier
from app.nn.optim import SgdState, cosine_lr, sgd_step
from app.repository.checkpoint_repository import CheckpointRepository
from app.tensor.tensor import Tensor, backward
from app.types.generator_types import OutlierRole
from app.types.train_types import LossTerm, TrainConfig, uses_ood

logger = logging.getLogger(__name__)

TRAIN_STREAM = 1

# Log column each loss term is reported under
_LOG_COLUMN = {
    LossTerm.CE: "ce",
    LossTerm.OE: "oe",
    LossTerm.NC: "nc",
    LossTerm.ORTH: "orth",
    LossTerm.EUC_ID: "nc",
    LossTerm.EUC_OOD: "orth",
}


@dataclass(frozen=True)
class Diagnostics:
    id_acc: float
    id_nc_cos: float
    aux_orth_mean: float | None


def diagnostics(model: MlpClassifier, id_data: LabeledDataset, aux_ood: OutlierDataset | None) -> Diagnostics:
    out = model.forward(id_data.features)
    predicted = np.argmax(out.logits.data, axis=1)
    class_weights = Tensor(model.fc_weight)
    cosines = losses.nc_cosines(out.features, id_data.labels, class_weights).data
    aux_orth = None
    if aux_ood is not None:
        aux_orth = losses.orth_loss(model.forward(aux_ood.features).features, class_weights).item()
    return Diagnostics(
        id_acc=float(np.mean(predicted == id_data.labels)),
        id_nc_cos=float(np.mean(cosines)),
        aux_orth_mean=aux_orth,
    )


def nc_alignment(model: MlpClassifier, dataset: LabeledDataset, correct_only: bool = True) -> float:
    """Mean cos(z, w_y), optionally over correctly classified samples only."""
    out = model.forward(dataset.features)
    cosines = losses.nc_cosines(out.features, dataset.labels, Tensor(model.fc_weight)).data
    if correct_only:
        mask = np.argmax(out.logits.data, axis=1) == dataset.labels
        if not mask.any():
            return 0.0
        cosines = cosines[mask]
    return float(np.mean(cosines))


class TrainSession:
    """Mutable training state: model, momentum buffers, random stream and epoch."""

    def __init__(
        self,
        model: MlpClassifier,
        id_data: LabeledDataset,
        aux_ood: OutlierDataset | None,
        config: TrainConfig,
    ):
        _validate_inputs(model, id_data, aux_ood, config)
        self.model = model
        self.id_data = id_data
        self.aux_ood = aux_ood
        self.config = config
        self.rng = Rng(config.seed, TRAIN_STREAM)
        self.optimizer = SgdState.zeros_like(model.parameters())
        self.ood_stream = (
            OodStream(aux_ood, config.ood_batch, self.rng)
            if aux_ood is not None and uses_ood(config.loss_variant) else None
        )
        self.epoch = 0
        self.stage = 1

    @classmethod
    def from_checkpoint(
        cls,
        model: MlpClassifier,
        meta: CheckpointMeta,
        id_data: LabeledDataset,
        aux_ood: OutlierDataset | None,
        config: TrainConfig,
    ) -> TrainSession:
        if meta.config_digest != config.digest():
            raise ConfigMismatchError("checkpoint was written by a run with a different training config")
        session = cls(model, id_data, aux_ood, config)
        session.rng.set_state(meta.rng_state)
        if meta.velocity is not None:
            session.optimizer = SgdState([np.array(v) for v in meta.velocity])
        if session.ood_stream is not None:
            if meta.ood_stream is None:
                raise DataError("checkpoint has no OOD stream state for this loss variant")
            session.ood_stream.set_state(meta.ood_stream)
        session.epoch = meta.epoch
        session.stage = meta.stage
        return session

    def checkpoint_meta(self) -> CheckpointMeta:
        return CheckpointMeta(
            stage=self.stage,
            epoch=self.epoch,
            rng_state=self.rng.get_state(),
            config_digest=self.config.digest(),
            velocity=[v.copy() for v in self.optimizer.velocity],
            ood_stream=self.ood_stream.get_state() if self.ood_stream is not None else None,
        )

    def run(
        self,
        until_epoch: int | None = None,
        checkpoint_every: int = 0,
        checkpoint_path: str | Path | None = None,
    ) -> TrainLog:
        """Train up to ``until_epoch`` (default: all epochs) and return the new log records."""
        until = self.config.epochs if until_epoch is None else min(until_epoch, self.config.epochs)
        log = TrainLog()
        plan = self.config.stage_plan
        repository = CheckpointRepository()
        while self.epoch < until:
            stage = plan.stage_of(self.epoch)
            lr = cosine_lr(self.epoch, self.config)
            sums: dict[str, float] = defaultdict(float)
            steps = 0
            for batch in batches(self.id_data, self.config.id_batch, self.rng):
                ood_batch = self.ood_stream.next_batch() if self.ood_stream is not None else None
                self._step(stage, batch, ood_batch, lr, sums)
                steps += 1
            self.epoch += 1
            self.stage = stage
            record = self._record(lr, stage, sums, steps)
            log.append(record)
            logger.info(
                f"Epoch {record.epoch}/{self.config.epochs} stage={stage} lr={lr:.5f} "
                f"ce={record.ce:.4f} id_acc={record.id_acc:.3f} id_nc_cos={record.id_nc_cos:.3f}"
                + (f" aux_orth={record.aux_orth_mean:.4f}" if record.aux_orth_mean is not None else "")
            )
            if checkpoint_every and checkpoint_path is not None and self.epoch % checkpoint_every == 0:
                repository.save(self.model, self.checkpoint_meta(), checkpoint_path)
        return log

    def _step(self, stage: int, batch: LabeledBatch, ood_batch, lr: float, sums: dict[str, float]) -> None:
        leaves = self.model.leaves()
        loss, breakdown = losses.composite_loss(
            stage, batch, ood_batch, self.model, self.config.weights, self.config.loss_variant, leaves
        )
        backward(loss)
        grads = [leaf.grad if leaf.grad is not None else np.zeros(leaf.shape) for leaf in leaves]
        params, self.optimizer = sgd_step(
            self.model.parameters(), grads, lr, self.config.momentum, self.config.weight_decay, self.optimizer
        )
        self.model = self.model.with_parameters(params)
        for term, value in breakdown.values.items():
            sums[_LOG_COLUMN[term]] += value

    def _record(self, lr: float, stage: int, sums: dict[str, float], steps: int) -> TrainLogRecord:
        diag = diagnostics(self.model, self.id_data, self.aux_ood)
        components = {column: value / steps for column, value in sums.items()} if steps else {}
        return TrainLogRecord(
            epoch=self.epoch,
            lr=lr,
            ce=components.get("ce"),
            oe=components.get("oe"),
            nc=components.get("nc"),
            orth=components.get("orth"),
            id_acc=diag.id_acc,
            aux_orth_mean=diag.aux_orth_mean,
            id_nc_cos=diag.id_nc_cos,
        )


def _validate_inputs(
    model: MlpClassifier,
    id_data: LabeledDataset,
    aux_ood: OutlierDataset | None,
    config: TrainConfig,
) -> None:
    if id_data.d != model.d_in:
        raise DataError(f"ID data width {id_data.d} does not match model input width {model.d_in}")
    if id_data.num_classes > model.num_classes:
        raise DataError(f"ID data has {id_data.num_classes} classes, model only {model.num_classes}")
    if aux_ood is not None:
        if aux_ood.role is not OutlierRole.AUXILIARY:
            raise ConfigurationError("test OOD data must not be used for training; pass auxiliary outliers")
        if aux_ood.d != id_data.d:
            raise DataError(f"auxiliary OOD width {aux_ood.d} does not match ID width {id_data.d}")
    elif uses_ood(config.loss_variant) and config.epochs > 0:
        raise ConfigurationError(f"loss variant {config.loss_variant.value} needs auxiliary OOD data")


def train(
    model: MlpClassifier,
    id_data: LabeledDataset,
    aux_ood: OutlierDataset | None,
    config: TrainConfig,
    checkpoint_every: int = 0,
    checkpoint_path: str | Path | None = None,
) -> tuple[MlpClassifier, TrainLog]:
    session = TrainSession(model, id_data, aux_ood, config)
    log = session.run(checkpoint_every=checkpoint_every, checkpoint_path=checkpoint_path)
    return session.model, log


def resume(
    checkpoint_path: str | Path,
    id_data: LabeledDataset,
    aux_ood: OutlierDataset | None,
    config: TrainConfig,
    checkpoint_every: int = 0,
) -> tuple[MlpClassifier, TrainLog]:
    """Continue an interrupted run; the log holds only the epochs run here."""
    model, meta = CheckpointRepository().load(checkpoint_path)
    session = TrainSession.from_checkpoint(model, meta, id_data, aux_ood, config)
    if session.epoch >= config.epochs:
        logger.info(f"Checkpoint already at epoch {session.epoch}; nothing to resume")
        return session.model, TrainLog()
    logger.info(f"Resuming from epoch {session.epoch} of {config.epochs}")
    log = session.run(checkpoint_every=checkpoint_every, checkpoint_path=checkpoint_path)
    return session.model, log
