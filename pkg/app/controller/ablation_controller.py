from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import ClassVar

import numpy as np
from pydantic import BaseModel

from app.config.run_config import RunConfig
from app.controller.data_controller import DataController
from app.controller.eval_controller import score_kinds
from app.detection.metrics import average_reports, detection_report
from app.detection.scores import score_series
from app.detection.separation import separation_triplet
from app.model.dataset_schema import LabeledDataset
from app.nn import mlp
from app.nn.mlp import MlpClassifier
from app.nn.trainer import TrainSession
from app.repository.report_repository import ReportRepository
from app.types.generator_types import OutlierRole
from app.types.train_types import LossVariant, uses_ood

logger = logging.getLogger(__name__)

ABLATION_FILE = "ablation.csv"
SUMMARY_FILE = "ablation_summary.csv"


class AblationRow(BaseModel):
    variant: LossVariant
    seed: int
    score_kind: str
    fpr95: float
    auroc: float
    id_cosine: float
    ood_cosine: float
    cosine_diff: float

    __csv_columns__: ClassVar[tuple[str, ...]] = ("variant", "seed", "score_kind", "fpr95", "auroc", "id_cosine", "ood_cosine", "cosine_diff")


class AblationSummary(BaseModel):
    variant: LossVariant
    score_kind: str
    runs: int
    fpr95_mean: float
    fpr95_var: float
    auroc_mean: float
    auroc_var: float

    __csv_columns__: ClassVar[tuple[str, ...]] = ("variant", "score_kind", "runs", "fpr95_mean", "fpr95_var", "auroc_mean", "auroc_var")


def summarize(rows: Sequence[AblationRow]) -> list[AblationSummary]:
    """Mean and population variance of FPR95 and AUROC per (variant, score kind)."""
    groups: dict[tuple[LossVariant, str], list[AblationRow]] = {}
    for row in rows:
        groups.setdefault((row.variant, row.score_kind), []).append(row)
    summaries = []
    for (variant, kind), group in groups.items():
        fpr = np.array([r.fpr95 for r in group])
        auc = np.array([r.auroc for r in group])
        summaries.append(AblationSummary(
            variant=variant,
            score_kind=kind,
            runs=len(group),
            fpr95_mean=float(fpr.mean()),
            fpr95_var=float(fpr.var()),
            auroc_mean=float(auc.mean()),
            auroc_var=float(auc.var()),
        ))
    return summaries


class AblationController:
    """
    Repeats warm-up, fine-tuning and evaluation over seeds and loss variants.

    Every variant of one seed starts from the same warmed-up model, so the
    variants differ only in the fine-tuning objective.
    """

    def __init__(self):
        self.data = DataController()
        self.reports = ReportRepository()

    def run(
        self,
        run_config: RunConfig,
        seeds: Sequence[int],
        variants: Sequence[LossVariant],
        out_dir: str | Path | None = None,
    ) -> tuple[list[AblationRow], list[AblationSummary]]:
        id_train = self.data.load_labeled(run_config.data_path("id_train"))
        id_test = self.data.load_labeled(run_config.data_path("id_test"))
        test_sets = [self.data.load_outliers(path, OutlierRole.TEST).features for path in run_config.test_set_paths()]
        aux_ood = None
        if any(uses_ood(v) for v in variants):
            aux_ood = self.data.load_outliers(run_config.data_path("ood_aux"), OutlierRole.AUXILIARY)

        rows: list[AblationRow] = []
        for seed in seeds:
            warmed = self._warmup(run_config.model_copy(update={"seed": seed}), id_train)
            for variant in variants:
                config = run_config.model_copy(update={"seed": seed, "loss_variant": variant}).to_train_config()
                session = TrainSession(warmed, id_train, aux_ood if uses_ood(variant) else None, config)
                session.run()
                rows += self._evaluate(session.model, variant, seed, run_config.score_kind, id_test.features, test_sets)
                logger.info(f"Finished variant={variant.value} seed={seed}")

        summaries = summarize(rows)
        if out_dir is not None:
            out_dir = Path(out_dir)
            self.reports.write_rows(
                out_dir / ABLATION_FILE,
                AblationRow.__csv_columns__,
                ([row.variant.value if c == "variant" else getattr(row, c) for c in AblationRow.__csv_columns__] for row in rows),
            )
            self.reports.write_rows(
                out_dir / SUMMARY_FILE,
                AblationSummary.__csv_columns__,
                ([s.variant.value if c == "variant" else getattr(s, c) for c in AblationSummary.__csv_columns__] for s in summaries),
            )
        return rows, summaries

    def _warmup(self, run_config: RunConfig, id_train: LabeledDataset) -> MlpClassifier:
        config = run_config.to_train_config()
        model = mlp.init(run_config.layer_dims(id_train.d), id_train.num_classes, config.seed)
        session = TrainSession(model, id_train, None, config.warmup_config())
        session.run()
        return session.model

    def _evaluate(
        self,
        model: MlpClassifier,
        variant: LossVariant,
        seed: int,
        score_kind: str,
        id_x: np.ndarray,
        test_sets: Sequence[np.ndarray],
    ) -> list[AblationRow]:
        # separation on the primary test set; detection averaged over all of them
        triplet = separation_triplet(model, id_x, test_sets[0])
        rows = []
        for kind in score_kinds(score_kind):
            per_set = [
                detection_report(score_series(model, id_x, ood_x, kind), f"test_{k}")
                for k, ood_x in enumerate(test_sets)
            ]
            report = average_reports(per_set)[0]
            rows.append(AblationRow(
                variant=variant,
                seed=seed,
                score_kind=kind.value,
                fpr95=report.fpr95,
                auroc=report.auroc,
                id_cosine=triplet.id.cosine,
                ood_cosine=triplet.ood.cosine,
                cosine_diff=triplet.diff("cosine"),
            ))
        return rows
