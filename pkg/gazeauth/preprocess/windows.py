"""
Velocity windows: segmentation, standardization and channel assembly.

Order of operations per recording:
(optional moving average) -> SG velocity -> 360-sample windows -> clamp
-> standardize -> NaN imputation.
"""
import csv
import dataclasses
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..calibration.fit import apply_calibration
from ..core.exceptions import InsufficientDataError, ShapeMismatchError, ValidationError
from ..core.types import Axis, CalibrationModel, GazeSeries, Recording
from .filters import moving_average3, sg_velocity

WINDOW_SAMPLES = 360
VELOCITY_LIMIT = 1000.0
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class WindowTensor:
    """
    One 360-sample block of per-channel velocities.

    Channels are [left-yaw, left-pitch, right-yaw, right-pitch] per axis,
    optical block first for 8-channel windows. calib_variant names the
    calibration model behind the visual channels (None for optical only).
    """
    values: np.ndarray
    subject_id: str
    recording_id: str
    window_index: int
    calib_variant: Optional[str] = None

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != WINDOW_SAMPLES:
            raise ShapeMismatchError(
                f"window must have {WINDOW_SAMPLES} rows, got shape {self.values.shape}"
            )

    @property
    def channels(self) -> int:
        return int(self.values.shape[1])


@dataclass
class NormStats:
    """Per-channel mean and standard deviation of training velocities (deg/s)."""
    mean: np.ndarray
    std: np.ndarray

    @property
    def channels(self) -> int:
        return int(self.mean.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NormStats":
        return cls(mean=np.array(data["mean"], dtype=np.float64), std=np.array(data["std"], dtype=np.float64))


def make_windows(velocities: np.ndarray) -> List[np.ndarray]:
    """
    Cut consecutive non-overlapping 360-sample windows from sample 0.

    The trailing remainder is dropped; values are clamped to +-1000 deg/s
    (NaN passes through).
    """
    v = np.asarray(velocities, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    count = v.shape[0] // WINDOW_SAMPLES
    return [
        np.clip(v[i * WINDOW_SAMPLES:(i + 1) * WINDOW_SAMPLES], -VELOCITY_LIMIT, VELOCITY_LIMIT)
        for i in range(count)
    ]


def fit_norm_stats(windows: Iterable[Union[WindowTensor, np.ndarray]]) -> NormStats:
    """
    Per-channel mean and population std over training windows, ignoring NaN.

    Channels with std below 1e-12 (or no finite values) get std 1.

    Raises:
        InsufficientDataError: No windows
        ShapeMismatchError: Windows disagree on channel count
    """
    arrays = [w.values if isinstance(w, WindowTensor) else np.asarray(w) for w in windows]
    if not arrays:
        raise InsufficientDataError("cannot fit normalization statistics on zero windows")
    if len({a.shape[1] for a in arrays}) != 1:
        raise ShapeMismatchError("windows have differing channel counts")
    stacked = np.concatenate(arrays, axis=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(stacked, axis=0)
        std = np.nanstd(stacked, axis=0)
    mean = np.where(np.isfinite(mean), mean, 0.0)
    std = np.where(np.isfinite(std) & (std >= SIGMA_FLOOR), std, 1.0)
    return NormStats(mean=mean, std=std)


def apply_norm(window: WindowTensor, stats: NormStats) -> WindowTensor:
    """
    Standardize a window, then impute NaN with 0.

    Raises:
        ShapeMismatchError: Channel count differs from the statistics
    """
    if window.channels != stats.channels:
        raise ShapeMismatchError(
            f"window has {window.channels} channels, statistics have {stats.channels}"
        )
    values = np.nan_to_num((window.values - stats.mean) / stats.std, nan=0.0)
    return dataclasses.replace(window, values=values)


def _channel_velocities(gaze: GazeSeries, filter_on: bool, fs: float) -> np.ndarray:
    positions = np.concatenate([gaze.left, gaze.right], axis=1)
    if filter_on:
        positions = moving_average3(positions)
    return sg_velocity(positions, fs=fs)


def recording_windows(
    rec: Recording,
    axis: Union[Axis, str],
    calib_models: Sequence[CalibrationModel] = (),
    filter_on: bool = False,
) -> List[WindowTensor]:
    """
    Clamped, not yet standardized windows of one recording.

    One variant per calibration model is emitted for axes V and B.

    Raises:
        ValidationError: Axis V or B without a calibration model
    """
    axis = Axis(axis)
    if axis != Axis.OPTICAL and not calib_models:
        raise ValidationError(
            f"axis {axis.value} needs at least one calibration model ({rec.recording_id})"
        )
    if len(rec) < WINDOW_SAMPLES:
        return []

    def wrap(values: np.ndarray, index: int, variant: Optional[str]) -> WindowTensor:
        return WindowTensor(values, rec.subject_id, rec.recording_id, index, variant)

    optical = make_windows(_channel_velocities(GazeSeries.optical(rec), filter_on, rec.sample_rate_hz))
    if axis == Axis.OPTICAL:
        return [wrap(w, i, None) for i, w in enumerate(optical)]

    out = []
    for model in calib_models:
        visual = make_windows(_channel_velocities(apply_calibration(model, rec), filter_on, rec.sample_rate_hz))
        for i, w in enumerate(visual):
            values = w if axis == Axis.VISUAL else np.concatenate([optical[i], w], axis=1)
            out.append(wrap(values, i, model.key))
    return out


def assemble_channels(
    rec: Recording,
    axis: Union[Axis, str],
    calib_models: Sequence[CalibrationModel],
    filter_on: bool,
    stats: NormStats,
) -> List[WindowTensor]:
    """Standardized, imputed windows of one recording (see recording_windows)."""
    return [apply_norm(w, stats) for w in recording_windows(rec, axis, calib_models, filter_on)]


def stack_windows(windows: Sequence[WindowTensor]) -> np.ndarray:
    """(B, 360, C) float array of window values."""
    return np.stack([w.values for w in windows], axis=0)


def write_windows_csv(windows: Sequence[WindowTensor], path: Union[str, Path]) -> Path:
    """Dump windows as window_index,row,c0..cN rows for inspection."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    channels = windows[0].channels if windows else 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["window_index", "row"] + [f"c{c}" for c in range(channels)])
        for w in windows:
            for row, values in enumerate(w.values):
                writer.writerow([w.window_index, row] + ["%.9g" % v for v in values])
    return path
