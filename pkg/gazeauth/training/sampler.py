"""
P x K minibatch sampling over per-subject window pools.
"""
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ..core.exceptions import InsufficientDataError, ShapeMismatchError
from ..logging import get_logger
from ..preprocess.windows import WindowTensor

logger = get_logger("training.sampler")


class WindowPool:
    """Standardized training windows grouped by subject."""

    def __init__(self, by_subject: Mapping[str, np.ndarray]):
        self.by_subject: Dict[str, np.ndarray] = {
            sid: np.asarray(windows) for sid, windows in sorted(by_subject.items())
        }
        shapes = {w.shape[1:] for w in self.by_subject.values() if len(w)}
        if len(shapes) > 1:
            raise ShapeMismatchError(f"pool windows have differing shapes: {sorted(shapes)}")

    @classmethod
    def from_windows(cls, windows: Sequence[WindowTensor]) -> "WindowPool":
        grouped: Dict[str, List[np.ndarray]] = {}
        for w in windows:
            grouped.setdefault(w.subject_id, []).append(w.values)
        return cls({sid: np.stack(vals) for sid, vals in grouped.items()})

    def __len__(self) -> int:
        return sum(len(w) for w in self.by_subject.values())

    @property
    def subject_ids(self) -> List[str]:
        return list(self.by_subject)

    def eligible(self, k: int) -> "WindowPool":
        """Pool restricted to subjects holding at least k windows."""
        kept = {sid: w for sid, w in self.by_subject.items() if len(w) >= k}
        dropped = len(self.by_subject) - len(kept)
        if dropped:
            logger.info(f"Excluded {dropped} of {len(self.by_subject)} subjects with fewer than {k} windows")
        return WindowPool(kept)


def sample_minibatch(pool: WindowPool, p: int, k: int, rng: np.random.Generator) -> Tuple[np.ndarray, List[str]]:
    """
    Draw P distinct subjects and K distinct windows of each.

    Args:
        pool: Window pool
        p: Users per batch
        k: Samples per user
        rng: Random generator

    Returns:
        ((P*K, T, C) batch, P*K subject labels)

    Raises:
        InsufficientDataError: Fewer than P subjects with K windows
    """
    eligible = [sid for sid, w in pool.by_subject.items() if len(w) >= k]
    if len(eligible) < p:
        raise InsufficientDataError(
            f"minibatch needs {p} subjects with >= {k} windows, pool has {len(eligible)} "
            f"(short by {p - len(eligible)})",
            suggestions=["Generate more training subjects or lower users_per_batch / samples_per_user"],
        )
    chosen = rng.choice(len(eligible), size=p, replace=False)
    batch, labels = [], []
    for index in chosen:
        sid = eligible[index]
        windows = pool.by_subject[sid]
        picks = rng.choice(len(windows), size=k, replace=False)
        batch.append(windows[picks])
        labels.extend([sid] * k)
    return np.concatenate(batch, axis=0), labels
