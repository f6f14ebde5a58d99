"""
ROC, equal error rate, FRR at a fixed FAR, and fold aggregation.

A score accepts at threshold t when score >= t.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import InsufficientDataError, ValidationError
from .scoring import ScoreSet

METRICS_HEADER = ["fold", "eer", "frr_at_far", "unresolved_far"]


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points ordered by rising threshold (FAR falls, FRR rises)."""
    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray

    def __len__(self) -> int:
        return int(self.thresholds.shape[0])


class FrrAtFar(NamedTuple):
    frr: float
    unresolved_far: bool


def _require_classes(scores: ScoreSet):
    if not scores.genuine.any():
        raise InsufficientDataError("no genuine scores")
    if scores.genuine.all():
        raise InsufficientDataError("no impostor scores")


def roc_curve(scores: ScoreSet) -> RocCurve:
    """
    Sweep every distinct score as threshold, plus +inf.

    The first point is (FAR 1, FRR 0), the last (FAR 0, FRR 1).

    Raises:
        InsufficientDataError: Missing genuine or impostor scores
    """
    _require_classes(scores)
    genuine = np.sort(scores.genuine_scores)
    impostor = np.sort(scores.impostor_scores)
    thresholds = np.append(np.unique(scores.similarity), np.inf)
    accepted_impostors = len(impostor) - np.searchsorted(impostor, thresholds, side="left")
    rejected_genuine = np.searchsorted(genuine, thresholds, side="left")
    return RocCurve(
        thresholds=thresholds,
        far=accepted_impostors / len(impostor),
        frr=rejected_genuine / len(genuine),
    )


def eer(scores: ScoreSet) -> float:
    """
    Equal error rate.

    Taken at the first threshold where FRR >= FAR, linearly interpolated
    with the previous operating point when the crossing is not exact.

    Raises:
        InsufficientDataError: Missing genuine or impostor scores
    """
    roc = roc_curve(scores)
    diff = roc.frr - roc.far
    i = int(np.argmax(diff >= 0))
    if diff[i] == 0 or i == 0:
        return float(roc.far[i])
    t = diff[i - 1] / (diff[i - 1] - diff[i])
    return float(roc.far[i - 1] + t * (roc.far[i] - roc.far[i - 1]))


def frr_at_far(scores: ScoreSet, far_target: float) -> FrrAtFar:
    """
    FRR at a target FAR, linearly interpolated on the ROC.

    When no threshold reaches a positive FAR at or below the target, the FRR
    at the strictest threshold (+inf, FRR 1) is returned and flagged unresolved.

    Raises:
        ValidationError: far_target outside (0, 1]
        InsufficientDataError: Missing genuine or impostor scores
    """
    if not 0.0 < far_target <= 1.0:
        raise ValidationError(f"far_target must lie in (0, 1], got {far_target}")
    roc = roc_curve(scores)
    positive = roc.far[roc.far > 0]
    if positive.size == 0 or positive.min() > far_target:
        return FrrAtFar(float(roc.frr[-1]), True)

    i = int(np.argmax(roc.far <= far_target))
    if roc.far[i] == far_target or i == 0:
        return FrrAtFar(float(roc.frr[i]), False)
    t = (roc.far[i - 1] - far_target) / (roc.far[i - 1] - roc.far[i])
    return FrrAtFar(float(roc.frr[i - 1] + t * (roc.frr[i] - roc.frr[i - 1])), False)


def aggregate_folds(values: Sequence[float]) -> Tuple[float, float]:
    """
    Mean and sample standard deviation (n - 1) across folds.

    Raises:
        ValidationError: Fewer than two folds
    """
    v = np.asarray(list(values), dtype=np.float64)
    if v.size < 2:
        raise ValidationError(f"need at least 2 fold values, got {v.size}")
    return float(v.mean()), float(v.std(ddof=1))


@dataclass
class FoldMetrics:
    """Metrics of one evaluation fold."""
    fold: int
    eer: float
    frr_at_far: float
    unresolved_far: bool

    @classmethod
    def from_scores(cls, fold: int, scores: ScoreSet, far_target: float) -> "FoldMetrics":
        frr = frr_at_far(scores, far_target)
        return cls(fold=fold, eer=eer(scores), frr_at_far=frr.frr, unresolved_far=frr.unresolved_far)


def write_fold_metrics(rows: Iterable[FoldMetrics], path: Union[str, Path]) -> Path:
    """Write fold,eer,frr_at_far,unresolved_far rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for row in rows:
            writer.writerow([row.fold, repr(row.eer), repr(row.frr_at_far), int(row.unresolved_far)])
    return path


def read_fold_metrics(path: Union[str, Path]) -> List[FoldMetrics]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return [
            FoldMetrics(int(r["fold"]), float(r["eer"]), float(r["frr_at_far"]), r["unresolved_far"] == "1")
            for r in csv.DictReader(f)
        ]
