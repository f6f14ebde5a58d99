"""Affine calibration and signal-quality measurement."""
from .fit import apply_calibration, apply_to_series, dwell_windows, fit_calibration
from .geometry import angular_distance_deg
from .quality import (
    QualityRow, measure_dataset, s2s_precision, spatial_accuracy, summarize, write_quality_report,
)

__all__ = [
    "apply_calibration", "apply_to_series", "dwell_windows", "fit_calibration",
    "angular_distance_deg",
    "QualityRow", "measure_dataset", "s2s_precision", "spatial_accuracy", "summarize",
    "write_quality_report",
]
