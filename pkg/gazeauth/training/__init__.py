"""Metric-learning trainer."""
from .config import MsLossConfig, REGIME_PRESETS, TrainConfig
from .loss import MinedPairs, cosine_matrix, mine_pairs, ms_loss
from .optim import AdamState, adam_step
from .sampler import WindowPool, sample_minibatch
from .schedule import one_cycle_lr
from .trainer import HistoryRow, TrainResult, steps_per_epoch, train, write_history

__all__ = [
    "MsLossConfig", "REGIME_PRESETS", "TrainConfig",
    "MinedPairs", "cosine_matrix", "mine_pairs", "ms_loss",
    "AdamState", "adam_step",
    "WindowPool", "sample_minibatch",
    "one_cycle_lr",
    "HistoryRow", "TrainResult", "steps_per_epoch", "train", "write_history",
]
