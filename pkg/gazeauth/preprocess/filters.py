"""
Position smoothing and velocity estimation.
"""
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import savgol_coeffs

from ..core.exceptions import ValidationError
from ..core.types import SAMPLE_RATE_HZ

SG_WINDOW = 7
SG_POLYORDER = 2


def moving_average3(positions: np.ndarray) -> np.ndarray:
    """
    Causal 3-sample moving average along the time axis.

    output[i] = mean(input[max(0, i - 2)..i]); the first two outputs are
    prefix means. NaN propagates.
    """
    x = np.asarray(positions, dtype=np.float64)
    out = x.copy()
    if len(x) > 1:
        out[1] = (x[0] + x[1]) / 2.0
    if len(x) > 2:
        out[2:] = (x[:-2] + x[1:-1] + x[2:]) / 3.0
    return out


@lru_cache(maxsize=32)
def _derivative_coeffs(pos: int, fs: float) -> np.ndarray:
    return savgol_coeffs(SG_WINDOW, SG_POLYORDER, deriv=1, delta=1.0 / fs, pos=pos, use="dot")


def sg_velocity(positions: np.ndarray, fs: float = SAMPLE_RATE_HZ) -> np.ndarray:
    """
    Savitzky-Golay first derivative (window 7, order 2) in units per second.

    Edge samples take the derivative of the quadratic fitted to the nearest
    full window. A NaN poisons every output whose window contains it.

    Args:
        positions: (n,) or (n, channels) series
        fs: Sample rate in Hz

    Returns:
        Velocities with the same shape

    Raises:
        ValidationError: If the series is shorter than the filter window
    """
    x = np.asarray(positions, dtype=np.float64)
    n = x.shape[0]
    if n < SG_WINDOW:
        raise ValidationError(
            f"series of {n} samples is shorter than the {SG_WINDOW}-sample derivative window"
        )
    flat = x.reshape(n, -1)
    half = SG_WINDOW // 2
    out = np.empty_like(flat)

    windows = sliding_window_view(flat, SG_WINDOW, axis=0)
    out[half:n - half] = np.sum(windows * _derivative_coeffs(half, float(fs)), axis=-1)
    head, tail = flat[:SG_WINDOW], flat[n - SG_WINDOW:]
    for pos in range(half):
        out[pos] = np.sum(_derivative_coeffs(pos, float(fs))[:, None] * head, axis=0)
        out[n - half + pos] = np.sum(_derivative_coeffs(half + 1 + pos, float(fs))[:, None] * tail, axis=0)
    return out.reshape(x.shape)
