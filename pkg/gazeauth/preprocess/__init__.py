"""Velocity preprocessing: smoothing, differentiation, windowing, standardization."""
from .filters import moving_average3, sg_velocity
from .windows import (
    NormStats, WindowTensor, apply_norm, assemble_channels, fit_norm_stats, make_windows,
    recording_windows, stack_windows, write_windows_csv,
)

__all__ = [
    "moving_average3", "sg_velocity",
    "NormStats", "WindowTensor", "apply_norm", "assemble_channels", "fit_norm_stats",
    "make_windows", "recording_windows", "stack_windows", "write_windows_csv",
]
