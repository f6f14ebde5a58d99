"""
Type definitions for GazeAuth.

Dataclasses for recordings, subjects, datasets and calibration models,
plus the enums naming every factor of the experiment grid.

Gaze directions are (yaw, pitch) pairs in degrees. Sample arrays are kept
column-wise in numpy arrays (one row per sample) and frozen after
construction, so a Dataset can be shared between threads.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .exceptions import ValidationError

SAMPLE_RATE_HZ = 72
CALIBRATION_DEPTHS_CM = (200, 75)
TASK_DEPTH_CM = 200

# Absolute slack on the nominal time grid, plus the relative error introduced
# by rendering timestamps with 9 significant digits.
TIME_GRID_TOLERANCE_S = 1e-9
TIME_GRID_RELATIVE_TOLERANCE = 1e-8


class Task(str, Enum):
    """Stimulus task of a recording."""
    CALIBRATION = "Calibration"
    RANDOM_SACCADE = "RandomSaccade"


class Split(str, Enum):
    """Dataset split a subject belongs to."""
    TRAIN = "Train"
    TEST = "Test"


class Eye(str, Enum):
    """Eye selector."""
    LEFT = "left"
    RIGHT = "right"


class Axis(str, Enum):
    """Axis of operation fed to the embedder."""
    OPTICAL = "O"
    VISUAL = "V"
    BOTH = "B"


class Scenario(str, Enum):
    """Which calibration produces verification-time visual-axis gaze."""
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"


class CalibTraining(str, Enum):
    """Calibration models used for training-time visual estimates."""
    ALL = "All"
    SINGLE = "Single"


class PipelineKind(str, Enum):
    """Gaze-estimation pipeline generation (signal quality)."""
    NEW = "New"
    OLD = "Old"


class Regime(str, Enum):
    """Training-duration regime."""
    CONFIG1 = "Config1"
    CONFIG2 = "Config2"


class FilterMode(str, Enum):
    """Causal 3-sample moving average on positions."""
    ON = "On"
    OFF = "Off"


@dataclass(frozen=True)
class GazeSample:
    """A single binocular gaze sample."""
    t: float
    left_optical: Tuple[float, float]
    right_optical: Tuple[float, float]
    target: Tuple[float, float]
    valid: bool


def _frozen(array: np.ndarray, dtype=np.float64) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Recording:
    """
    A time series of per-eye optical-axis gaze plus the stimulus trace.

    Attributes:
        t: (n,) seconds since recording start
        left: (n, 2) left-eye optical (yaw, pitch) in degrees
        right: (n, 2) right-eye optical (yaw, pitch) in degrees
        target: (n, 2) stimulus direction in cyclopean coordinates
        valid: (n,) sample validity; invalid samples carry NaN gaze
    """
    subject_id: str
    recording_id: str
    task: Task
    target_depth_cm: int
    t: np.ndarray
    left: np.ndarray
    right: np.ndarray
    target: np.ndarray
    valid: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "t", _frozen(self.t))
        object.__setattr__(self, "left", _frozen(self.left))
        object.__setattr__(self, "right", _frozen(self.right))
        object.__setattr__(self, "target", _frozen(self.target))
        object.__setattr__(self, "valid", _frozen(self.valid, dtype=bool))
        self._validate()

    def _validate(self):
        n = self.t.shape[0]
        if self.t.ndim != 1:
            raise ValidationError(f"{self.recording_id}: timestamps must be 1-D")
        for name in ("left", "right", "target"):
            if getattr(self, name).shape != (n, 2):
                raise ValidationError(
                    f"{self.recording_id}: {name} must have shape ({n}, 2)"
                )
        if self.valid.shape != (n,):
            raise ValidationError(f"{self.recording_id}: valid must have shape ({n},)")
        if self.sample_rate_hz != SAMPLE_RATE_HZ:
            raise ValidationError(
                f"{self.recording_id}: sample rate {self.sample_rate_hz} Hz, expected {SAMPLE_RATE_HZ}"
            )
        if self.target_depth_cm not in CALIBRATION_DEPTHS_CM:
            raise ValidationError(
                f"{self.recording_id}: unsupported target depth {self.target_depth_cm} cm"
            )

        check_time_grid(self.t, self.sample_rate_hz, self.recording_id)

        gaze = np.concatenate([self.left, self.right], axis=1)
        valid_rows = gaze[self.valid]
        if not np.all(np.isfinite(valid_rows)):
            raise ValidationError(f"{self.recording_id}: valid samples must have finite gaze")
        if np.any(np.abs(valid_rows) > 90.0):
            raise ValidationError(f"{self.recording_id}: gaze outside [-90, 90] degrees")
        if not np.all(np.isnan(gaze[~self.valid])):
            raise ValidationError(f"{self.recording_id}: invalid samples must carry NaN gaze")

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def duration_s(self) -> float:
        """Nominal duration in seconds."""
        return len(self) / self.sample_rate_hz

    def sample(self, index: int) -> GazeSample:
        """Materialize one sample."""
        return GazeSample(
            t=float(self.t[index]),
            left_optical=(float(self.left[index, 0]), float(self.left[index, 1])),
            right_optical=(float(self.right[index, 0]), float(self.right[index, 1])),
            target=(float(self.target[index, 0]), float(self.target[index, 1])),
            valid=bool(self.valid[index]),
        )

    @property
    def samples(self) -> List[GazeSample]:
        """All samples as GazeSample objects (slow; for inspection)."""
        return [self.sample(i) for i in range(len(self))]

    def eye(self, eye: Eye) -> np.ndarray:
        """Optical positions of one eye."""
        return self.left if Eye(eye) == Eye.LEFT else self.right

    def dwell_intervals(self) -> List[Tuple[int, int]]:
        """
        Runs of a constant, finite stimulus target.

        Returns:
            List of half-open (start, stop) sample index ranges
        """
        n = len(self)
        if n == 0:
            return []
        finite = np.all(np.isfinite(self.target), axis=1)
        changed = np.ones(n, dtype=bool)
        changed[1:] = np.any(self.target[1:] != self.target[:-1], axis=1) | (finite[1:] != finite[:-1])
        starts = np.flatnonzero(changed)
        stops = np.append(starts[1:], n)
        return [(int(a), int(b)) for a, b in zip(starts, stops) if finite[a]]

    def equals(self, other: "Recording") -> bool:
        """Bitwise equality of metadata and sample values."""
        if not isinstance(other, Recording):
            return False
        meta = (self.subject_id, self.recording_id, self.task, self.target_depth_cm, self.sample_rate_hz)
        other_meta = (other.subject_id, other.recording_id, other.task, other.target_depth_cm, other.sample_rate_hz)
        if meta != other_meta:
            return False
        return all(
            a.shape == b.shape and a.tobytes() == b.tobytes()
            for a, b in zip(
                (self.t, self.left, self.right, self.target, self.valid),
                (other.t, other.left, other.right, other.target, other.valid),
            )
        )


@dataclass(frozen=True, eq=False)
class GazeSeries:
    """Per-eye (yaw, pitch) series aligned with a recording's samples."""
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.float64)
        right = np.asarray(self.right, dtype=np.float64)
        if left.ndim != 2 or left.shape[1] != 2 or left.shape != right.shape:
            raise ValidationError(f"gaze series must be two (n, 2) arrays, got {left.shape} and {right.shape}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __len__(self) -> int:
        return int(self.left.shape[0])

    def eye(self, eye: Eye) -> np.ndarray:
        return self.left if Eye(eye) == Eye.LEFT else self.right

    def cyclopean(self) -> np.ndarray:
        """Per-sample average of both eyes."""
        return 0.5 * (self.left + self.right)

    @classmethod
    def optical(cls, rec: "Recording") -> "GazeSeries":
        """Uncalibrated optical-axis positions of a recording."""
        return cls(rec.left, rec.right)


def check_time_grid(t: np.ndarray, sample_rate_hz: int, recording_id: str):
    """
    Validate strictly increasing timestamps on the nominal 1/fs grid.

    Raises:
        ValidationError: If timestamps are non-monotone or off-grid
    """
    if t.size == 0:
        return
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValidationError(f"{recording_id}: timestamps are not strictly increasing")
    nominal = t[0] + np.arange(t.size) / sample_rate_hz
    slack = TIME_GRID_TOLERANCE_S + TIME_GRID_RELATIVE_TOLERANCE * np.abs(t)
    if np.any(np.abs(t - nominal) > slack):
        raise ValidationError(
            f"{recording_id}: timestamps deviate from the {sample_rate_hz} Hz grid"
        )


@dataclass(frozen=True)
class SubjectRecord:
    """All recordings of one subject."""
    subject_id: str
    calibration_recordings: Tuple[Recording, Recording]
    task_recordings: Tuple[Recording, ...]

    def __post_init__(self):
        object.__setattr__(self, "calibration_recordings", tuple(self.calibration_recordings))
        object.__setattr__(self, "task_recordings", tuple(self.task_recordings))
        if len(self.calibration_recordings) != 2:
            raise ValidationError(
                f"subject {self.subject_id}: expected exactly two calibration recordings"
            )
        depths = tuple(r.target_depth_cm for r in self.calibration_recordings)
        if depths != CALIBRATION_DEPTHS_CM:
            raise ValidationError(
                f"subject {self.subject_id}: calibration depths {depths}, expected {CALIBRATION_DEPTHS_CM}"
            )
        if not self.task_recordings:
            raise ValidationError(f"subject {self.subject_id}: no task recordings")
        for rec in self.recordings:
            if rec.subject_id != self.subject_id:
                raise ValidationError(
                    f"recording {rec.recording_id} belongs to {rec.subject_id}, not {self.subject_id}"
                )
        for rec in self.calibration_recordings:
            if rec.task != Task.CALIBRATION:
                raise ValidationError(f"{rec.recording_id}: calibration slot holds a {rec.task.value} recording")
        for rec in self.task_recordings:
            if rec.task != Task.RANDOM_SACCADE or rec.target_depth_cm != TASK_DEPTH_CM:
                raise ValidationError(
                    f"{rec.recording_id}: task recordings must be RandomSaccade at {TASK_DEPTH_CM} cm"
                )

    @property
    def recordings(self) -> Tuple[Recording, ...]:
        """Calibration recordings followed by task recordings."""
        return self.calibration_recordings + self.task_recordings

    def calibration_at(self, depth_cm: int) -> Recording:
        """Calibration recording for a target depth."""
        for rec in self.calibration_recordings:
            if rec.target_depth_cm == depth_cm:
                return rec
        raise ValidationError(f"subject {self.subject_id}: no calibration at {depth_cm} cm")


@dataclass(frozen=True)
class Dataset:
    """
    Multi-subject gaze corpus with split and fold assignment.

    Attributes:
        subjects: Subject records in a stable order
        split: subject_id -> Train/Test
        folds: subject_id -> fold index (test subjects only; may be empty)
    """
    subjects: Tuple[SubjectRecord, ...]
    split: Dict[str, Split]
    folds: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))
        object.__setattr__(self, "split", {k: Split(v) for k, v in self.split.items()})
        object.__setattr__(self, "folds", dict(self.folds))
        self._validate()

    def _validate(self):
        ids = [s.subject_id for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate subject_id in dataset")
        if set(self.split) != set(ids):
            raise ValidationError("split map must cover exactly the dataset subjects")

        seen = set()
        for rec in self.recordings():
            if rec.recording_id in seen:
                raise ValidationError(f"duplicate recording_id {rec.recording_id}")
            seen.add(rec.recording_id)

        if not self.folds:
            return
        test_ids = set(self.test_subject_ids)
        if set(self.folds) != test_ids:
            raise ValidationError("every test subject (and only test subjects) must have a fold")
        sizes: Dict[int, int] = {}
        for fold in self.folds.values():
            if fold < 0:
                raise ValidationError(f"negative fold index {fold}")
            sizes[fold] = sizes.get(fold, 0) + 1
        k = max(sizes) + 1
        counts = [sizes.get(i, 0) for i in range(k)]
        if max(counts) - min(counts) > 1:
            raise ValidationError(f"fold sizes {counts} differ by more than one")

    @property
    def train_subject_ids(self) -> List[str]:
        return [s.subject_id for s in self.subjects if self.split[s.subject_id] == Split.TRAIN]

    @property
    def test_subject_ids(self) -> List[str]:
        return [s.subject_id for s in self.subjects if self.split[s.subject_id] == Split.TEST]

    @property
    def n_folds(self) -> int:
        return max(self.folds.values()) + 1 if self.folds else 0

    def subject(self, subject_id: str) -> SubjectRecord:
        """Look up a subject record."""
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise ValidationError(f"unknown subject {subject_id}")

    def recordings(self) -> Iterator[Recording]:
        """Iterate all recordings, subject by subject."""
        for s in self.subjects:
            yield from s.recordings

    def fold_members(self, fold: int) -> List[str]:
        """Test subjects assigned to a fold, in dataset order."""
        return [sid for sid in self.test_subject_ids if self.folds.get(sid) == fold]

    def equals(self, other: "Dataset") -> bool:
        """Bitwise structural equality."""
        if not isinstance(other, Dataset):
            return False
        if self.split != other.split or self.folds != other.folds:
            return False
        if [s.subject_id for s in self.subjects] != [s.subject_id for s in other.subjects]:
            return False
        for a, b in zip(self.subjects, other.subjects):
            if len(a.recordings) != len(b.recordings):
                return False
            if not all(x.equals(y) for x, y in zip(a.recordings, b.recordings)):
                return False
        return True


@dataclass(frozen=True, eq=False)
class CalibrationModel:
    """
    Per-eye affine map from optical to visual axis.

    visual = gain @ optical + offset, independently for each eye.
    """
    subject_id: str
    fitted_depth_cm: int
    gain_left: np.ndarray
    offset_left: np.ndarray
    gain_right: np.ndarray
    offset_right: np.ndarray
    fit_rmse_deg: float = 0.0

    def __post_init__(self):
        for name, shape in (("gain_left", (2, 2)), ("gain_right", (2, 2)),
                            ("offset_left", (2,)), ("offset_right", (2,))):
            value = _frozen(getattr(self, name))
            if value.shape != shape:
                raise ValidationError(f"calibration {name} must have shape {shape}")
            if not np.all(np.isfinite(value)):
                raise ValidationError(f"calibration {name} is not finite")
            object.__setattr__(self, name, value)
        for gain in (self.gain_left, self.gain_right):
            if abs(np.linalg.det(gain)) <= 1e-6:
                raise ValidationError(f"calibration gain for {self.subject_id} is not invertible")
        if not self.fit_rmse_deg >= 0:
            raise ValidationError("fit_rmse_deg must be non-negative")

    def gain(self, eye: Eye) -> np.ndarray:
        return self.gain_left if Eye(eye) == Eye.LEFT else self.gain_right

    def offset(self, eye: Eye) -> np.ndarray:
        return self.offset_left if Eye(eye) == Eye.LEFT else self.offset_right

    @property
    def key(self) -> str:
        """Short tag such as 'S0007@200'."""
        return f"{self.subject_id}@{self.fitted_depth_cm}"

    @classmethod
    def identity(cls, subject_id: str, depth_cm: int = 200,
                 offset: Optional[Tuple[float, float]] = None) -> "CalibrationModel":
        """Identity gain with an optional shared offset."""
        off = np.zeros(2) if offset is None else np.asarray(offset, dtype=float)
        return cls(subject_id, depth_cm, np.eye(2), off, np.eye(2), off)
