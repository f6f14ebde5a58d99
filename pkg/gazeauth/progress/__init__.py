"""Progress tracking system."""
from .reporter import ProgressReporter, SimpleReporter, create_reporter
from .tracker import STAGE_WEIGHTS, ProgressTracker, Stage, StageProgress

__all__ = [
    "ProgressReporter", "SimpleReporter", "create_reporter",
    "STAGE_WEIGHTS", "ProgressTracker", "Stage", "StageProgress",
]
