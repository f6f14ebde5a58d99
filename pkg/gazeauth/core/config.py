"""
Configuration management for GazeAuth.

Dataclass defaults, overridden by a TOML file (sections [synth], [train],
[grid], [eval], [log]), then by environment variables, then by CLI flags.
"""
import os
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError


@dataclass
class SynthConfig:
    """Synthetic corpus configuration."""
    n_train_subjects: int = 40
    n_test_subjects: int = 20
    task_duration_s: float = 60.0     # >= 25 s so 20 s survive windowing
    task_recordings: int = 2          # enrollment + verification
    dwell_s: float = 1.0              # per random-saccade target
    calibration_dwell_s: float = 1.5  # per calibration grid target
    fov_half_deg: float = 15.0
    ipd_mm: float = 63.0
    folds: int = 10
    workers: int = 1
    seed: int = 0

    def validate(self):
        if self.task_duration_s < 25:
            raise ConfigError(f"synth.task_duration_s must be >= 25 (got {self.task_duration_s})")
        if self.n_train_subjects < 1 or self.n_test_subjects < 1:
            raise ConfigError("synth subject counts must be >= 1")
        if self.task_recordings < 1:
            raise ConfigError("synth.task_recordings must be >= 1")
        if self.dwell_s <= 0 or self.calibration_dwell_s <= 0:
            raise ConfigError("dwell durations must be positive")
        if not 0 < self.fov_half_deg < 60:
            raise ConfigError("synth.fov_half_deg must lie in (0, 60)")
        if self.ipd_mm <= 0:
            raise ConfigError("synth.ipd_mm must be positive")


@dataclass
class TrainSettings:
    """Embedder and training-regime configuration."""
    epoch_scale: float = 0.5          # desk-scale multiplier on regime epochs
    users_per_batch: int = 8          # desk-scale P for Config1 (Config2 doubles it)
    samples_per_user: int = 8         # desk-scale K for Config1 (Config2 doubles it)
    full_scale: bool = False         # use 100/16x16 and 1000/32x32 verbatim
    growth: int = 32
    kernel_size: int = 3
    dilations: List[int] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64, 1])
    activation: str = "gelu"
    threads: int = 1
    seed: int = 0


@dataclass
class EvalSettings:
    """Enrollment/verification protocol configuration."""
    verification_seconds: int = 20
    far_target: float = 2e-5          # 1 in 50,000
    folds: int = 10


@dataclass
class GridSettings:
    """Factor grid for the 'grid' command."""
    scenarios: List[str] = field(default_factory=lambda: ["S1", "S2"])
    calib_training: List[str] = field(default_factory=lambda: ["All", "Single"])
    pipelines: List[str] = field(default_factory=lambda: ["New", "Old"])
    axes: List[str] = field(default_factory=lambda: ["O", "V", "B"])
    regimes: List[str] = field(default_factory=lambda: ["Config1"])
    filters: List[str] = field(default_factory=lambda: ["Off"])
    experimental_s3: bool = False


@dataclass
class LogConfig:
    """Logging configuration."""
    level: str = "INFO"
    json_format: bool = False
    max_file_size: int = 10 * 1024 * 1024  # 10 MB
    backup_count: int = 5


@dataclass
class Config:
    """Main application configuration."""
    output_dir: Path = field(default_factory=lambda: Path("runs"))
    logs_dir: Optional[Path] = None

    synth: SynthConfig = field(default_factory=SynthConfig)
    train: TrainSettings = field(default_factory=TrainSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    log: LogConfig = field(default_factory=LogConfig)

    def __post_init__(self):
        """Initialize derived paths."""
        self.output_dir = Path(self.output_dir)
        if self.logs_dir is None:
            self.logs_dir = self.output_dir / "logs"
        self._load_from_env()

    def _load_from_env(self):
        """Load configuration from environment variables."""
        if os.environ.get("GAZEAUTH_LOG_LEVEL"):
            self.log.level = os.environ["GAZEAUTH_LOG_LEVEL"]
        if os.environ.get("GAZEAUTH_THREADS"):
            self.train.threads = int(os.environ["GAZEAUTH_THREADS"])
        if os.environ.get("GAZEAUTH_OUTPUT_DIR"):
            self.output_dir = Path(os.environ["GAZEAUTH_OUTPUT_DIR"])
            self.logs_dir = self.output_dir / "logs"


_SECTIONS = ("synth", "train", "eval", "grid", "log")


def _apply_section(target: Any, section: str, values: Dict[str, Any]):
    known = {f.name: f for f in fields(target)}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown key '{key}' in [{section}]")
        current = getattr(target, key)
        if isinstance(current, bool) and not isinstance(value, bool):
            raise ConfigError(f"[{section}] {key} must be a boolean")
        if isinstance(current, float) and isinstance(value, int):
            value = float(value)
        setattr(target, key, value)


def load_config(path: Optional[Path] = None) -> Config:
    """
    Build a Config from defaults, an optional TOML file and the environment.

    Args:
        path: TOML file with [synth], [train], [grid], [eval], [log] sections

    Returns:
        Config instance

    Raises:
        ConfigError: On unreadable files, unknown sections or keys
    """
    config = Config()
    if path is None:
        return config

    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}")

    for section, values in data.items():
        if section == "output_dir":
            config.output_dir = Path(values)
            config.logs_dir = config.output_dir / "logs"
            continue
        if section not in _SECTIONS or not isinstance(values, dict):
            raise ConfigError(f"unknown section [{section}] in {path}")
        target = getattr(config, section)
        assert is_dataclass(target)
        _apply_section(target, section, values)

    config.synth.validate()
    # Environment wins over the file.
    config._load_from_env()
    return config


# Global config instance
_config: Optional[Config] = None


def get_config() -> Config:
    """Get the global configuration instance."""
    global _config
    if _config is None:
        _config = Config()
    return _config


def set_config(config: Config):
    """Set the global configuration instance."""
    global _config
    _config = config
