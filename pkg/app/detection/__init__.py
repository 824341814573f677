from app.detection.metrics import auroc, detection_report, fpr_at_tpr, threshold_at_tpr
from app.detection.projection import PrincipalDirection, principal_ood_direction, project_features
from app.detection.scores import combined_score, msp_score, score_samples, score_series
from app.detection.separation import orthonormal_basis, separation_metrics, separation_triplet

__all__ = [
    "PrincipalDirection",
    "auroc",
    "combined_score",
    "detection_report",
    "fpr_at_tpr",
    "msp_score",
    "orthonormal_basis",
    "principal_ood_direction",
    "project_features",
    "score_samples",
    "score_series",
    "separation_metrics",
    "separation_triplet",
    "threshold_at_tpr",
]
