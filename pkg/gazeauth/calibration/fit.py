"""
Per-subject, per-eye affine calibration.

Provides:
- Dwell window selection from the stimulus trace
- Least-squares fitting of optical -> visual affine maps
- Application of a fitted model to any recording
"""
import math
from typing import List, Tuple

import numpy as np

from ..core.exceptions import SingularSystemError, UnderdeterminedCalibrationError, ValidationError
from ..core.types import CalibrationModel, Eye, GazeSeries, Recording, Task
from ..logging import get_logger

logger = get_logger("calibration.fit")

DWELL_TRIM_FRACTION = 0.2
SETTLE_S = 0.1


def dwell_windows(rec: Recording) -> List[Tuple[int, int]]:
    """
    Central part of every dwell interval.

    Drops the first max(20 %, 100 ms) and the last 20 % of each dwell.

    Returns:
        Half-open (start, stop) index ranges; empty ranges are omitted
    """
    settle = int(math.ceil(SETTLE_S * rec.sample_rate_hz))
    windows = []
    for start, stop in rec.dwell_intervals():
        trim = int(round(DWELL_TRIM_FRACTION * (stop - start)))
        lo = start + max(trim, settle)
        hi = stop - trim
        if hi > lo:
            windows.append((lo, hi))
    return windows


def _fit_eye(optical: np.ndarray, targets: np.ndarray, what: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    design = np.column_stack([optical, np.ones(len(optical))])
    if np.linalg.matrix_rank(design) < 3:
        raise SingularSystemError(what)
    coef, _, _, _ = np.linalg.lstsq(design, targets, rcond=None)
    residual = design @ coef - targets
    return coef[:2].T, coef[2], residual


def fit_calibration(rec: Recording) -> CalibrationModel:
    """
    Fit per-eye affine maps from optical gaze to target directions.

    Args:
        rec: Calibration recording

    Returns:
        CalibrationModel tagged with the recording's depth

    Raises:
        ValidationError: If the recording is not a calibration recording
        UnderdeterminedCalibrationError: Fewer than 3 distinct or collinear targets
        SingularSystemError: Degenerate optical samples
    """
    if rec.task != Task.CALIBRATION:
        raise ValidationError(f"{rec.recording_id} is a {rec.task.value} recording, not Calibration")

    rows = np.concatenate([np.arange(lo, hi) for lo, hi in dwell_windows(rec)] or [np.array([], dtype=int)])
    rows = rows[rec.valid[rows]]

    distinct = np.unique(rec.target[rows], axis=0) if rows.size else np.empty((0, 2))
    if len(distinct) < 3:
        raise UnderdeterminedCalibrationError(rec.recording_id, f"{len(distinct)} distinct targets, need 3")
    if np.linalg.matrix_rank(np.column_stack([distinct, np.ones(len(distinct))])) < 3:
        raise UnderdeterminedCalibrationError(rec.recording_id, "targets are collinear")

    params = {}
    residuals = []
    for eye in (Eye.LEFT, Eye.RIGHT):
        gain, offset, residual = _fit_eye(
            rec.eye(eye)[rows], rec.target[rows], f"{rec.recording_id} ({eye.value} eye)"
        )
        params[f"gain_{eye.value}"] = gain
        params[f"offset_{eye.value}"] = offset
        residuals.append(residual)

    rmse = float(np.sqrt(np.mean(np.sum(np.concatenate(residuals) ** 2, axis=1))))
    model = CalibrationModel(
        subject_id=rec.subject_id,
        fitted_depth_cm=rec.target_depth_cm,
        fit_rmse_deg=rmse,
        **params,
    )
    logger.debug(f"Fitted {model.key} on {rows.size} samples, rmse {rmse:.4f} deg")
    return model


def apply_calibration(model: CalibrationModel, rec: Recording) -> GazeSeries:
    """
    Map a recording's optical gaze to the visual axis.

    v = gain @ optical + offset per eye; NaN samples stay NaN.
    """
    return apply_to_series(model, GazeSeries.optical(rec))


def apply_to_series(model: CalibrationModel, gaze: GazeSeries) -> GazeSeries:
    """Apply a calibration model to per-eye series."""
    return GazeSeries(
        left=gaze.left @ model.gain_left.T + model.offset_left,
        right=gaze.right @ model.gain_right.T + model.offset_right,
    )
