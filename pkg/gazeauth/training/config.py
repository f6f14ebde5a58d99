"""
Loss and training-loop configuration, including the regime presets.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Union

from ..core.config import TrainSettings
from ..core.exceptions import ConfigError
from ..core.types import Regime

# (epochs, users per batch, samples per user)
REGIME_PRESETS = {
    Regime.CONFIG1: (100, 16, 16),
    Regime.CONFIG2: (1000, 32, 32),
}


@dataclass(frozen=True)
class MsLossConfig:
    """Multi-similarity loss hyperparameters."""
    alpha: float = 2.0
    beta: float = 50.0
    lam: float = 0.5
    epsilon: float = 0.1

    def __post_init__(self):
        if min(self.alpha, self.beta, self.lam, self.epsilon) <= 0:
            raise ConfigError("MS loss hyperparameters must all be positive")


@dataclass(frozen=True)
class TrainConfig:
    """Training loop, optimizer and learning-rate schedule."""
    epochs: int = 100
    users_per_batch: int = 16
    samples_per_user: int = 16
    lr_base: float = 1e-4
    lr_peak: float = 1e-2
    lr_min: float = 1e-7
    warm_fraction: float = 0.30
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.epochs < 1 or self.users_per_batch < 1 or self.samples_per_user < 1:
            raise ConfigError("epochs, users_per_batch and samples_per_user must be >= 1")
        if not 0 < self.warm_fraction < 1:
            raise ConfigError(f"warm_fraction must lie in (0, 1), got {self.warm_fraction}")

    @property
    def minibatch(self) -> int:
        """m = P * K."""
        return self.users_per_batch * self.samples_per_user

    @classmethod
    def preset(cls, regime: Union[Regime, str], seed: int = 0) -> "TrainConfig":
        """Full-scale regime values."""
        epochs, p, k = REGIME_PRESETS[Regime(regime)]
        return cls(epochs=epochs, users_per_batch=p, samples_per_user=k, seed=seed)

    @classmethod
    def for_regime(cls, regime: Union[Regime, str], settings: Optional[TrainSettings] = None) -> "TrainConfig":
        """
        Regime values scaled for desk-size corpora.

        Epochs are multiplied by epoch_scale; P and K come from the settings
        for Config1 and are doubled for Config2, preserving the ratio
        between regimes.
        """
        settings = settings or TrainSettings()
        regime = Regime(regime)
        if settings.full_scale:
            base = cls.preset(regime, seed=settings.seed)
            return cls(**{**asdict(base), "threads": settings.threads})
        epochs, _, _ = REGIME_PRESETS[regime]
        factor = 2 if regime == Regime.CONFIG2 else 1
        return cls(
            epochs=max(1, int(round(epochs * settings.epoch_scale))),
            users_per_batch=settings.users_per_batch * factor,
            samples_per_user=settings.samples_per_user * factor,
            seed=settings.seed,
            threads=settings.threads,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
