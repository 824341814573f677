from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from app.config.run_config import RunConfig
from app.controller.data_controller import DataController
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.model.report_schema import TrainLog
from app.nn import mlp
from app.nn.mlp import MlpClassifier
from app.nn.trainer import TrainSession
from app.repository.checkpoint_repository import CheckpointRepository
from app.repository.report_repository import ReportRepository
from app.types.generator_types import OutlierRole
from app.types.train_types import TrainConfig, uses_ood

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.bin"
TRAIN_LOG_FILE = "train_log.csv"
WARMUP_CHECKPOINT_FILE = "warmup_checkpoint.bin"
WARMUP_LOG_FILE = "warmup_log.csv"


@dataclass(frozen=True)
class TrainResult:
    model: MlpClassifier
    log: TrainLog
    checkpoint_path: Path
    log_path: Path
    warmup_log: TrainLog | None = None


class TrainController:
    """Controller for warm-up, two-stage fine-tuning and resume."""

    def __init__(self):
        self.data = DataController()
        self.checkpoints = CheckpointRepository()
        self.reports = ReportRepository()

    def train(self, run_config: RunConfig) -> TrainResult:
        """
        Run a full experiment and write the checkpoint and log.

        Without ``init_checkpoint`` a fresh model is initialized and
        warmed up with CE only first; with ``resume_from`` an interrupted
        fine-tuning run continues and its log is appended to.

        Raises:
            ConfigurationError: invalid config or altered config on resume
            DataError: missing or malformed data and checkpoint files
        """
        config = run_config.to_train_config()
        out_dir = run_config.resolve_output_dir()
        id_data = self.data.load_labeled(run_config.data_path("id_train"))
        aux_ood = self._load_aux(run_config, config)
        checkpoint_path = out_dir / CHECKPOINT_FILE
        log_path = out_dir / TRAIN_LOG_FILE

        if run_config.resume_from is not None:
            model, meta = self.checkpoints.load(run_config.resume_from)
            session = TrainSession.from_checkpoint(model, meta, id_data, aux_ood, config)
            logger.info(f"Resuming {run_config.resume_from} at epoch {session.epoch} of {config.epochs}")
            log = self._run(session, run_config, checkpoint_path)
            self.reports.save_train_log(log, log_path, append=True)
            return TrainResult(session.model, log, checkpoint_path, log_path)

        warmup_log = None
        if run_config.init_checkpoint is not None:
            model, _ = self.checkpoints.load(run_config.init_checkpoint)
            logger.info(f"Fine-tuning from {run_config.init_checkpoint}")
        else:
            model, warmup_log = self._warmup(id_data, run_config, config, out_dir)

        session = TrainSession(model, id_data, aux_ood, config)
        log = self._run(session, run_config, checkpoint_path)
        self.reports.save_train_log(log, log_path)
        return TrainResult(session.model, log, checkpoint_path, log_path, warmup_log)

    def _warmup(
        self,
        id_data: LabeledDataset,
        run_config: RunConfig,
        config: TrainConfig,
        out_dir: Path,
    ) -> tuple[MlpClassifier, TrainLog]:
        model = mlp.init(run_config.layer_dims(id_data.d), id_data.num_classes, config.seed)
        warm = config.warmup_config()
        logger.info(f"Warm-up: {warm.epochs} CE-only epochs at lr0={warm.lr0}")
        session = TrainSession(model, id_data, None, warm)
        log = session.run()
        self.checkpoints.save(session.model, session.checkpoint_meta(), out_dir / WARMUP_CHECKPOINT_FILE)
        self.reports.save_train_log(log, out_dir / WARMUP_LOG_FILE)
        return session.model, log

    def _run(self, session: TrainSession, run_config: RunConfig, checkpoint_path: Path) -> TrainLog:
        log = session.run(checkpoint_every=run_config.checkpoint_every, checkpoint_path=checkpoint_path)
        self.checkpoints.save(session.model, session.checkpoint_meta(), checkpoint_path)
        return log

    def _load_aux(self, run_config: RunConfig, config: TrainConfig) -> OutlierDataset | None:
        if not uses_ood(config.loss_variant):
            return None
        return self.data.load_outliers(run_config.data_path("ood_aux"), OutlierRole.AUXILIARY)
