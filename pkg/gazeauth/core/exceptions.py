"""
Custom exceptions for GazeAuth.

Provides meaningful error messages and suggestions for common issues.
Validation problems (bad inputs, malformed files, unmet preconditions) and
numeric/runtime problems are kept apart so the CLI can map them to distinct
exit codes.
"""
from pathlib import Path
from typing import List, Optional, Union


class GazeAuthError(Exception):
    """Base exception for GazeAuth errors."""

    exit_code = 3

    def __init__(self, message: str, suggestions: Optional[List[str]] = None):
        super().__init__(message)
        self.message = message
        self.suggestions = suggestions or []


class ValidationError(GazeAuthError):
    """Invalid input, configuration or precondition."""

    exit_code = 2


class NumericError(GazeAuthError):
    """Numerical failure (singular system, undefined similarity, ...)."""

    exit_code = 3


class ConfigError(ValidationError):
    """Invalid configuration file or value."""

    def __init__(self, message: str):
        super().__init__(
            message,
            suggestions=[
                "Check the TOML sections: [synth], [train], [grid], [eval], [log]",
                "Valid keys are the fields of SynthConfig, TrainSettings, GridSettings, EvalSettings and LogConfig in gazeauth/core/config.py",
            ]
        )


class DatasetFormatError(ValidationError):
    """Malformed manifest or samples file."""

    def __init__(self, path: Union[str, Path], message: str, line: Optional[int] = None):
        location = f"{path}:{line}" if line is not None else str(path)
        super().__init__(
            f"{location}: {message}",
            suggestions=[
                "Regenerate the dataset with 'gazeauth gen'",
                "Ensure the file was not edited by hand",
            ]
        )
        self.path = Path(path)
        self.line = line


class DatasetIOError(GazeAuthError):
    """Filesystem failure while reading or writing a dataset."""

    def __init__(self, path: Union[str, Path], error: str = ""):
        super().__init__(
            f"I/O failure on {path}: {error}",
            suggestions=[
                "Check that the directory exists and is writable",
                "Check free disk space",
            ]
        )
        self.path = Path(path)


class UnderdeterminedCalibrationError(ValidationError):
    """Calibration recording does not constrain an affine map."""

    def __init__(self, recording_id: str, detail: str):
        super().__init__(
            f"underdetermined calibration for {recording_id}: {detail}",
            suggestions=[
                "Calibration needs at least 3 non-collinear dwell targets",
            ]
        )


class InsufficientDataError(ValidationError):
    """Not enough subjects, recordings or windows for the requested operation."""

    pass


class ShapeMismatchError(ValidationError):
    """Array or tensor shapes do not match the expected layout."""

    pass


class SingularSystemError(NumericError):
    """Least-squares normal equations are singular."""

    def __init__(self, what: str):
        super().__init__(
            f"singular normal equations while fitting {what}",
            suggestions=["Check the calibration recording for frozen or invalid gaze"]
        )


class ZeroNormError(NumericError):
    """Cosine similarity undefined for a zero-length vector."""

    def __init__(self, what: str):
        super().__init__(f"zero-length embedding: {what} (cosine similarity undefined)")


class CheckpointError(GazeAuthError):
    """Unreadable or incompatible checkpoint file."""

    def __init__(self, path: Union[str, Path], error: str):
        super().__init__(
            f"Invalid checkpoint {path}: {error}",
            suggestions=[
                "Re-run 'gazeauth train' to produce a fresh checkpoint",
            ]
        )
