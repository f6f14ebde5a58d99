"""Enrollment/verification protocol and biometric metrics."""
from .metrics import (
    FoldMetrics, FrrAtFar, RocCurve, aggregate_folds, eer, frr_at_far, read_fold_metrics,
    roc_curve, write_fold_metrics,
)
from .scoring import (
    EmbeddingContext, ScoreSet, centroid_embedding, cosine_similarity, load_scores, score_all,
    score_claims, segments_for_seconds, write_scores,
)

__all__ = [
    "FoldMetrics", "FrrAtFar", "RocCurve", "aggregate_folds", "eer", "frr_at_far",
    "read_fold_metrics", "roc_curve", "write_fold_metrics",
    "EmbeddingContext", "ScoreSet", "centroid_embedding", "cosine_similarity", "load_scores",
    "score_all", "score_claims", "segments_for_seconds", "write_scores",
]
