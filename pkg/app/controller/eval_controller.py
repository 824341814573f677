from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.controller.data_controller import DataController
from app.detection.metrics import AVERAGE_DATASET, average_reports, detection_report
from app.detection.projection import PrincipalDirection, principal_ood_direction, project_features
from app.detection.scores import score_series
from app.detection.separation import separation_triplet
from app.exceptions import ConfigurationError, DataError
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.model.report_schema import DetectionReport, ScoreKind, SeparationTriplet
from app.nn.mlp import MlpClassifier
from app.repository.checkpoint_repository import CheckpointRepository
from app.repository.report_repository import ReportRepository
from app.types.generator_types import OutlierRole

logger = logging.getLogger(__name__)

DETECTION_FILE = "detection.csv"
SEPARATION_FILE = "separation.csv"
PROJECTION_FILE = "projection_{dims}d.csv"


def score_kinds(score_kind: str) -> list[ScoreKind]:
    if score_kind == "all":
        return [ScoreKind.MSP, ScoreKind.COMBINED]
    try:
        return [ScoreKind(score_kind)]
    except ValueError as e:
        raise ConfigurationError(f"score_kind must be all, msp or combined, got {score_kind!r}") from e


@dataclass(frozen=True)
class Projection:
    populations: list[str]
    coordinates: np.ndarray
    direction: PrincipalDirection | None = None


class EvalController:
    """Controller for detection metrics, separation degree and feature projections."""

    def __init__(self):
        self.data = DataController()
        self.checkpoints = CheckpointRepository()
        self.reports = ReportRepository()

    def load_model(self, checkpoint: str | Path) -> MlpClassifier:
        model, meta = self.checkpoints.load(checkpoint)
        logger.info(f"Loaded model from {checkpoint} (epoch {meta.epoch}, layers {list(model.layer_dims)})")
        return model

    def load_pair(self, model: MlpClassifier, id_test: str | Path, ood_test: str | Path) -> tuple[LabeledDataset, OutlierDataset]:
        id_data = self.data.load_labeled(id_test)
        ood_data = self.data.load_outliers(ood_test, OutlierRole.TEST)
        for name, dataset in (("ID", id_data), ("OOD", ood_data)):
            if dataset.d != model.d_in:
                raise DataError(f"{name} data width {dataset.d} does not match model input width {model.d_in}")
        return id_data, ood_data

    def evaluate(
        self,
        checkpoint: str | Path,
        id_test: str | Path,
        ood_tests: Sequence[str | Path],
        score_kind: str = "all",
        out_dir: str | Path | None = None,
    ) -> list[DetectionReport]:
        """
        FPR95, AUROC and threshold for each requested score function and
        test OOD set, named by file stem. With several test sets an
        ``average`` row per score function follows.

        Raises:
            ConfigurationError: unknown score kind, no test set, or two test
                sets with the same name
            DataError: missing files or width mismatch
        """
        kinds = score_kinds(score_kind)
        names = [Path(path).stem for path in ood_tests]
        if not names:
            raise ConfigurationError("eval needs at least one test OOD set")
        if len(set(names)) != len(names):
            raise ConfigurationError(f"test OOD sets need distinct file names, got {names}")
        if AVERAGE_DATASET in names:
            raise ConfigurationError(f"a test OOD set may not be named {AVERAGE_DATASET!r}")

        model = self.load_model(checkpoint)
        reports = []
        for name, path in zip(names, ood_tests):
            id_data, ood_data = self.load_pair(model, id_test, path)
            for kind in kinds:
                series = score_series(model, id_data.features, ood_data.features, kind)
                report = detection_report(series, name)
                logger.info(
                    f"{name} {kind.value}: FPR95={report.fpr95:.4f} AUROC={report.auroc:.4f} "
                    f"threshold={report.threshold:.6g}"
                )
                reports.append(report)
        if len(names) > 1:
            reports += average_reports(reports)
        if out_dir is not None:
            self.reports.save_detection_reports(reports, Path(out_dir) / DETECTION_FILE)
        return reports

    def separation(
        self,
        checkpoint: str | Path,
        id_test: str | Path,
        ood_test: str | Path,
        out_dir: str | Path | None = None,
    ) -> SeparationTriplet:
        model = self.load_model(checkpoint)
        id_data, ood_data = self.load_pair(model, id_test, ood_test)
        triplet = separation_triplet(model, id_data.features, ood_data.features)
        for row in triplet.rows():
            logger.info(f"{row['metric']}: ID={row['id_mean']:.6f} OOD={row['ood_mean']:.6f} Diff={row['diff']:.6f}")
        if out_dir is not None:
            self.reports.save_separation(triplet, Path(out_dir) / SEPARATION_FILE)
        return triplet

    def project(
        self,
        checkpoint: str | Path,
        datasets: Sequence[str | Path],
        dims: int = 2,
        out_dir: str | Path | None = None,
    ) -> Projection:
        """
        Project features of every dataset onto the (w1, w2) plane, plus the
        principal OOD direction as a third axis when ``dims`` is 3.

        Labeled rows are tagged ``id:<class>``, outlier rows ``ood``.

        Raises:
            ConfigurationError: dims other than 2 or 3, or dims 3 without outliers
            NumericError: w1 parallel to w2, or zero OOD covariance
        """
        if dims not in (2, 3):
            raise ConfigurationError(f"dims must be 2 or 3, got {dims}")
        if not datasets:
            raise ConfigurationError("project needs at least one dataset")
        model = self.load_model(checkpoint)
        populations: list[str] = []
        features: list[np.ndarray] = []
        ood_features: list[np.ndarray] = []
        for path in datasets:
            dataset = self.data.load_any(path)
            if dataset.d != model.d_in:
                raise DataError(f"{path}: width {dataset.d} does not match model input width {model.d_in}")
            z = model.forward(dataset.features).features.data
            features.append(z)
            if isinstance(dataset, LabeledDataset):
                populations += [f"id:{label}" for label in dataset.labels]
            else:
                populations += ["ood"] * dataset.n
                ood_features.append(z)

        direction = None
        if dims == 3:
            if not ood_features:
                raise ConfigurationError("a 3-D projection needs at least one outlier dataset")
            direction = principal_ood_direction(np.vstack(ood_features))
        coordinates = project_features(
            np.vstack(features), model.fc_weight, direction.vector if direction is not None else None
        )
        if out_dir is not None:
            self.reports.save_projection(populations, coordinates, Path(out_dir) / PROJECTION_FILE.format(dims=dims))
        return Projection(populations, coordinates, direction)
