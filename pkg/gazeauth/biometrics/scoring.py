"""
Enrollment/verification templates and cosine score sets.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import InsufficientDataError, ValidationError, ZeroNormError
from ..core.types import Axis, CalibrationModel, Recording
from ..model.embedder import Embedder, embed_windows
from ..preprocess.windows import WINDOW_SAMPLES, NormStats, assemble_channels, stack_windows

SCORES_HEADER = ["verify_subject", "enroll_subject", "similarity", "genuine"]


@dataclass(frozen=True)
class EmbeddingContext:
    """How a recording becomes network input."""
    axis: Axis
    filter_on: bool
    stats: NormStats


def segments_for_seconds(seconds: float, sample_rate_hz: int = 72) -> int:
    """
    Number of 5 s windows covering a duration.

    Raises:
        ValidationError: Duration is not a positive multiple of one window
    """
    samples = seconds * sample_rate_hz
    count = samples / WINDOW_SAMPLES
    if count < 1 or abs(count - round(count)) > 1e-9:
        raise ValidationError(
            f"{seconds} s is not a positive multiple of the {WINDOW_SAMPLES / sample_rate_hz:g} s window"
        )
    return int(round(count))


def centroid_embedding(
    rec: Recording,
    model: Embedder,
    n_segments: int,
    context: EmbeddingContext,
    calibration: Optional[CalibrationModel] = None,
) -> np.ndarray:
    """
    Mean raw embedding of a recording's first n windows.

    Args:
        rec: Task recording
        model: Trained embedder
        n_segments: Windows to average
        context: Axis, filter flag and normalization statistics
        calibration: Model producing visual channels (required for V and B)

    Returns:
        (128,) float64 centroid, not normalized

    Raises:
        InsufficientDataError: Recording yields fewer than n_segments windows
    """
    models = [calibration] if calibration is not None else []
    windows = assemble_channels(rec, context.axis, models, context.filter_on, context.stats)
    if len(windows) < n_segments:
        raise InsufficientDataError(
            f"{rec.recording_id} yields {len(windows)} windows, {n_segments} required"
        )
    embeddings = embed_windows(model, stack_windows(windows[:n_segments]))
    return embeddings.mean(axis=0)


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Similarity scores with genuine/impostor labels."""
    similarity: np.ndarray
    genuine: np.ndarray
    verify_subjects: Tuple[str, ...] = ()
    enroll_subjects: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "similarity", np.asarray(self.similarity, dtype=np.float64))
        object.__setattr__(self, "genuine", np.asarray(self.genuine, dtype=bool))
        if self.similarity.shape != self.genuine.shape or self.similarity.ndim != 1:
            raise ValidationError("similarity and genuine arrays must be 1-D and equally long")
        if self.verify_subjects or self.enroll_subjects:
            if not len(self.verify_subjects) == len(self.enroll_subjects) == len(self.similarity):
                raise ValidationError("subject columns must match the score count")
            same = np.array([v == e for v, e in zip(self.verify_subjects, self.enroll_subjects)], dtype=bool)
            if not np.array_equal(same, self.genuine):
                raise ValidationError("genuine flags must mark exactly the same-subject pairs")

    @classmethod
    def from_scores(cls, genuine: Iterable[float], impostor: Iterable[float]) -> "ScoreSet":
        """Unattributed score set from two score lists."""
        g = np.asarray(list(genuine), dtype=np.float64)
        i = np.asarray(list(impostor), dtype=np.float64)
        return cls(np.concatenate([g, i]), np.concatenate([np.ones(len(g), bool), np.zeros(len(i), bool)]))

    def __len__(self) -> int:
        return int(self.similarity.shape[0])

    @property
    def genuine_scores(self) -> np.ndarray:
        return self.similarity[self.genuine]

    @property
    def impostor_scores(self) -> np.ndarray:
        return self.similarity[~self.genuine]


def _unit(vector: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise ZeroNormError(what)
    return np.asarray(vector, dtype=np.float64) / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two vectors, clipped to [-1, 1]."""
    return float(np.clip(np.dot(_unit(a, "first vector"), _unit(b, "second vector")), -1.0, 1.0))


def score_all(enroll: Mapping[str, np.ndarray], verify: Mapping[str, np.ndarray]) -> ScoreSet:
    """
    Score every verification template against every enrollment template.

    Pairs are ordered by verify subject, then enroll subject.
    """
    enroll_ids = sorted(enroll)
    verify_ids = sorted(verify)
    if not enroll_ids or not verify_ids:
        raise InsufficientDataError("score_all needs at least one enrollment and one verification template")
    e = np.stack([_unit(enroll[s], f"enrollment centroid of {s}") for s in enroll_ids])
    v = np.stack([_unit(verify[s], f"verification centroid of {s}") for s in verify_ids])
    sims = np.clip(v @ e.T, -1.0, 1.0)

    verify_col: List[str] = [s for s in verify_ids for _ in enroll_ids]
    enroll_col: List[str] = enroll_ids * len(verify_ids)
    return ScoreSet(
        similarity=sims.ravel(),
        genuine=np.array([a == b for a, b in zip(verify_col, enroll_col)], dtype=bool),
        verify_subjects=tuple(verify_col),
        enroll_subjects=tuple(enroll_col),
    )


def score_claims(
    enroll: Mapping[str, np.ndarray],
    verify_by_claim: Mapping[Tuple[str, str], np.ndarray],
) -> ScoreSet:
    """
    Score verification templates that depend on the claimed identity.

    Args:
        enroll: claimed subject -> enrollment centroid
        verify_by_claim: (actual subject, claimed subject) -> verification centroid

    Returns:
        One score per claim, ordered by (actual, claimed)
    """
    keys = sorted(verify_by_claim)
    if not keys:
        raise InsufficientDataError("no verification attempts to score")
    sims, verify_col, enroll_col = [], [], []
    for actual, claimed in keys:
        if claimed not in enroll:
            raise ValidationError(f"no enrollment template for claimed subject {claimed}")
        sims.append(cosine_similarity(verify_by_claim[(actual, claimed)], enroll[claimed]))
        verify_col.append(actual)
        enroll_col.append(claimed)
    return ScoreSet(
        similarity=np.array(sims),
        genuine=np.array([a == c for a, c in keys], dtype=bool),
        verify_subjects=tuple(verify_col),
        enroll_subjects=tuple(enroll_col),
    )


def write_scores(scores: ScoreSet, path: Union[str, Path]) -> Path:
    """Dump verify_subject,enroll_subject,similarity,genuine rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SCORES_HEADER)
        verify: Sequence[str] = scores.verify_subjects or [""] * len(scores)
        enroll: Sequence[str] = scores.enroll_subjects or [""] * len(scores)
        for v, e, s, g in zip(verify, enroll, scores.similarity, scores.genuine):
            writer.writerow([v, e, repr(float(s)), int(g)])
    return path


def load_scores(path: Union[str, Path]) -> ScoreSet:
    """Read a score dump written by write_scores."""
    rows: Dict[str, list] = {k: [] for k in SCORES_HEADER}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            for k in SCORES_HEADER:
                rows[k].append(row[k])
    return ScoreSet(
        similarity=np.array([float(s) for s in rows["similarity"]]),
        genuine=np.array([g == "1" for g in rows["genuine"]], dtype=bool),
        verify_subjects=tuple(rows["verify_subject"]),
        enroll_subjects=tuple(rows["enroll_subject"]),
    )
