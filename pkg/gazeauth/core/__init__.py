"""Core configuration, errors and types."""
from .config import Config, get_config, load_config
from .types import (
    Axis, CalibTraining, CalibrationModel, Dataset, Eye, FilterMode, GazeSample, GazeSeries,
    PipelineKind, Recording, Regime, Scenario, Split, SubjectRecord, Task,
)

__all__ = [
    "Config", "get_config", "load_config",
    "Axis", "CalibTraining", "CalibrationModel", "Dataset", "Eye", "FilterMode",
    "GazeSample", "GazeSeries", "PipelineKind", "Recording", "Regime", "Scenario", "Split",
    "SubjectRecord", "Task",
]
