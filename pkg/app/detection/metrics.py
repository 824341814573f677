"""
Threshold, FPR at fixed TPR and AUROC.

A sample is called ID when its score is >= the threshold, so ties at the
threshold land on the ID side. Every metric here depends on the scores only
through their order.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from app.exceptions import DataError
from app.model.report_schema import DetectionReport, ScoreKind, ScoreSeries

AVERAGE_DATASET = "average"


def _nonempty(scores: np.ndarray, name: str) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if scores.size == 0:
        raise DataError(f"{name} scores are empty")
    return scores


def threshold_at_tpr(id_scores: np.ndarray, tpr: float = 0.95) -> float:
    """The ceil(tpr * n)-th largest ID score: the largest threshold keeping that many ID samples."""
    scores = _nonempty(id_scores, "ID")
    if not 0 < tpr <= 1:
        raise ValueError(f"tpr must lie in (0, 1], got {tpr}")
    # guard against tpr * n landing a hair above an integer
    keep = min(scores.size, max(1, math.ceil(tpr * scores.size - 1e-9)))
    return float(np.sort(scores)[::-1][keep - 1])


def fpr_at_tpr(series: ScoreSeries, tpr: float = 0.95) -> float:
    ood = _nonempty(series.ood_scores, "OOD")
    threshold = threshold_at_tpr(series.id_scores, tpr)
    return float(np.count_nonzero(ood >= threshold)) / ood.size


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, tied values sharing the average of their positions."""
    order = np.argsort(values, kind="mergesort")
    sorted_values = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    start = 0
    while start < values.size:
        stop = start + 1
        while stop < values.size and sorted_values[stop] == sorted_values[start]:
            stop += 1
        ranks[order[start:stop]] = 0.5 * (start + 1 + stop)
        start = stop
    return ranks


def auroc(series: ScoreSeries) -> float:
    """P(ID score > OOD score) + P(tie) / 2 via the Mann-Whitney rank sum."""
    id_scores = _nonempty(series.id_scores, "ID")
    ood_scores = _nonempty(series.ood_scores, "OOD")
    n, m = id_scores.size, ood_scores.size
    ranks = _midranks(np.concatenate([id_scores, ood_scores]))
    wins = ranks[:n].sum() - n * (n + 1) / 2.0
    return float(wins / (n * m))


def detection_report(series: ScoreSeries, dataset: str, tpr: float = 0.95) -> DetectionReport:
    return DetectionReport(
        dataset=dataset,
        score_kind=series.score_kind,
        fpr95=fpr_at_tpr(series, tpr),
        auroc=auroc(series),
        threshold=threshold_at_tpr(series.id_scores, tpr),
    )


def average_reports(reports: Sequence[DetectionReport]) -> list[DetectionReport]:
    """
    One ``average`` row per score kind: mean FPR95 and AUROC over the test
    sets. The threshold depends on ID scores only, so it is carried over.
    """
    by_kind: dict[ScoreKind, list[DetectionReport]] = {}
    for report in reports:
        by_kind.setdefault(report.score_kind, []).append(report)
    return [
        DetectionReport(
            dataset=AVERAGE_DATASET,
            score_kind=kind,
            fpr95=float(np.mean([r.fpr95 for r in group])),
            auroc=float(np.mean([r.auroc for r in group])),
            threshold=group[0].threshold,
        )
        for kind, group in by_kind.items()
    ]
