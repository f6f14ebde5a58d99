"""
Signal-quality metrics: spatial accuracy and sample-to-sample precision.

Both are median-of-medians over dwell windows. Windows whose gaze spreads
over 10 degrees or more are not fixations and are excluded.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
from scipy.spatial.distance import pdist

from ..core.exceptions import InsufficientDataError
from ..core.types import CalibrationModel, Dataset, Eye, GazeSeries, Recording
from ..logging import get_logger
from .fit import apply_calibration, dwell_windows
from .geometry import angular_distance_deg, to_unit_vectors

logger = get_logger("calibration.quality")

MAX_DISPERSION_DEG = 10.0
QUALITY_HEADER = ["recording_id", "axis", "accuracy_deg", "precision_deg"]


def dispersion_deg(gaze: np.ndarray) -> float:
    """Largest pairwise angular distance within a set of gaze samples."""
    if len(gaze) < 2:
        return 0.0
    chord = float(np.max(pdist(to_unit_vectors(gaze))))
    return float(np.degrees(2.0 * np.arcsin(min(chord / 2.0, 1.0))))


def _fixation_tracks(rec: Recording, gaze: GazeSeries, binocular: bool):
    """Yield (rows, positions) per included window and track."""
    if len(gaze) != len(rec):
        raise InsufficientDataError(
            f"{rec.recording_id}: gaze has {len(gaze)} samples, recording has {len(rec)}"
        )
    tracks = [gaze.cyclopean()] if binocular else [gaze.eye(Eye.LEFT), gaze.eye(Eye.RIGHT)]
    for lo, hi in dwell_windows(rec):
        for positions in tracks:
            window = positions[lo:hi]
            usable = rec.valid[lo:hi] & np.all(np.isfinite(window), axis=1)
            if not usable.any():
                continue
            if dispersion_deg(window[usable]) >= MAX_DISPERSION_DEG:
                continue
            yield lo + np.flatnonzero(usable), positions


def spatial_accuracy(rec: Recording, gaze: GazeSeries, binocular: bool = True) -> float:
    """
    Median angular offset between gaze and target, median over windows.

    Args:
        rec: Recording carrying the target trace
        gaze: Gaze to evaluate (usually calibrated)
        binocular: Use cyclopean gaze (else every window x eye counts)

    Raises:
        InsufficientDataError: No dwell window survives exclusion
    """
    medians = [
        float(np.median(angular_distance_deg(positions[rows], rec.target[rows])))
        for rows, positions in _fixation_tracks(rec, gaze, binocular)
    ]
    if not medians:
        raise InsufficientDataError(f"{rec.recording_id}: no valid fixations")
    return float(np.median(medians))


def s2s_precision(rec: Recording, gaze: GazeSeries, binocular: bool = True) -> float:
    """
    RMS of consecutive-sample angular distances within dwell windows.

    Only pairs of adjacent valid samples count.

    Raises:
        InsufficientDataError: No eligible sample pair
    """
    values = []
    for rows, positions in _fixation_tracks(rec, gaze, binocular):
        pairs = rows[:-1][np.diff(rows) == 1]
        if pairs.size == 0:
            continue
        step = angular_distance_deg(positions[pairs], positions[pairs + 1])
        values.append(float(np.sqrt(np.mean(step ** 2))))
    if not values:
        raise InsufficientDataError(f"{rec.recording_id}: no consecutive valid samples in any fixation")
    return float(np.median(values))


@dataclass
class QualityRow:
    """Signal quality of one recording on one axis."""
    recording_id: str
    axis: str
    accuracy_deg: float
    precision_deg: float


def measure_dataset(
    dataset: Dataset,
    calibrations: Dict[str, CalibrationModel],
    include_optical: bool = False,
    binocular: bool = True,
) -> List[QualityRow]:
    """
    Quality of every recording after calibration.

    Args:
        dataset: Corpus to measure
        calibrations: subject_id -> model applied to that subject's recordings
        include_optical: Also report raw optical-axis quality (axis "O")
        binocular: Cyclopean aggregation

    Returns:
        One row per recording and axis, in dataset order
    """
    rows = []
    for rec in dataset.recordings():
        series = {"V": apply_calibration(calibrations[rec.subject_id], rec)}
        if include_optical:
            series = {"O": GazeSeries.optical(rec), **series}
        for axis, gaze in series.items():
            rows.append(QualityRow(
                recording_id=rec.recording_id,
                axis=axis,
                accuracy_deg=spatial_accuracy(rec, gaze, binocular),
                precision_deg=s2s_precision(rec, gaze, binocular),
            ))
    return rows


def summarize(rows: Iterable[QualityRow], axis: str = "V") -> Optional[Dict[str, float]]:
    """Median over recordings of the per-recording medians."""
    selected = [r for r in rows if r.axis == axis]
    if not selected:
        return None
    return {
        "accuracy_deg": float(np.median([r.accuracy_deg for r in selected])),
        "precision_deg": float(np.median([r.precision_deg for r in selected])),
        "recordings": len(selected),
    }


def write_quality_report(rows: Iterable[QualityRow], path: Union[str, Path]) -> Path:
    """Write recording_id,axis,accuracy_deg,precision_deg rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(QUALITY_HEADER)
        count = 0
        for row in rows:
            writer.writerow([row.recording_id, row.axis, f"{row.accuracy_deg:.6f}", f"{row.precision_deg:.6f}"])
            count += 1
    logger.info(f"Wrote quality report with {count} rows to {path}")
    return path
