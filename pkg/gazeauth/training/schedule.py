"""
One-cycle cosine learning-rate schedule.
"""
import math

from ..core.exceptions import ValidationError
from .config import TrainConfig


def one_cycle_lr(progress: float, cfg: TrainConfig) -> float:
    """
    Learning rate at a fraction of training.

    Cosine ramp lr_base -> lr_peak on [0, warm_fraction], then cosine decay
    lr_peak -> lr_min on [warm_fraction, 1]. The three anchors are exact.

    Raises:
        ValidationError: progress outside [0, 1]
    """
    if not 0.0 <= progress <= 1.0:
        raise ValidationError(f"schedule progress must lie in [0, 1], got {progress}")
    w = cfg.warm_fraction
    if progress <= w:
        s = (1.0 - math.cos(math.pi * progress / w)) / 2.0
        return cfg.lr_base * (1.0 - s) + cfg.lr_peak * s
    q = (progress - w) / (1.0 - w)
    s = (1.0 + math.cos(math.pi * q)) / 2.0
    return cfg.lr_min * (1.0 - s) + cfg.lr_peak * s
