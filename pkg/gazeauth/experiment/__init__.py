"""Experiment grid, scenario semantics, runner and reports."""
from .report import change_marker, format_cell, render_comparison, render_report
from .runner import ExperimentRunner, TrainedModel, load_trained, run_experiment
from .scenarios import (
    CalibrationBank, CalibrationRef, enrollment_calibration, resolve_verification_calibration,
    training_depths,
)
from .spec import ExperimentResult, ExperimentSpec, expand_grid, reference_comparisons, reference_grid

__all__ = [
    "change_marker", "format_cell", "render_comparison", "render_report",
    "ExperimentRunner", "TrainedModel", "load_trained", "run_experiment",
    "CalibrationBank", "CalibrationRef", "enrollment_calibration", "resolve_verification_calibration",
    "training_depths",
    "ExperimentResult", "ExperimentSpec", "expand_grid", "reference_comparisons", "reference_grid",
]
