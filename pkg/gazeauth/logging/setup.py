"""
Logging configuration for GazeAuth.

Provides:
- Rich console output with colors and formatting
- Rotating file logs, human-readable or JSON
- Per-experiment log files for detailed debugging
"""
import json
import logging
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

try:
    from rich.console import Console
    from rich.logging import RichHandler
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False

from ..core.config import get_config


# Global console instance (shared with progress bars)
console = Console(stderr=True) if RICH_AVAILABLE else None

_EXTRA_FIELDS = ("exp_id", "step", "epoch", "fold", "subject_id", "duration_ms")


class JSONFormatter(logging.Formatter):
    """JSON log formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        for name in _EXTRA_FIELDS:
            if hasattr(record, name):
                log_data[name] = getattr(record, name)

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, ensure_ascii=False)


class HumanFormatter(logging.Formatter):
    """Human-readable formatter for file logs."""

    def __init__(self):
        super().__init__(
            fmt="%(asctime)s | %(name)-32s | %(levelname)-8s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )


def setup_logging(
    level: str = "INFO",
    enable_file_logging: bool = True,
    log_file: Optional[Path] = None,
    json_format: Optional[bool] = None,
) -> None:
    """
    Initialize the logging system.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        enable_file_logging: Whether to write logs to files
        log_file: Custom log file path (uses default if None)
        json_format: Use JSON format for file logs (config default if None)
    """
    config = get_config()
    if json_format is None:
        json_format = config.log.json_format

    root_logger = logging.getLogger("gazeauth")
    root_logger.setLevel(getattr(logging, level.upper()))
    root_logger.handlers.clear()

    if RICH_AVAILABLE:
        console_handler = RichHandler(
            console=console,
            show_time=True,
            show_path=False,
            rich_tracebacks=True,
            tracebacks_show_locals=False,
            markup=False,
        )
    else:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(HumanFormatter())
    console_handler.setLevel(getattr(logging, level.upper()))
    root_logger.addHandler(console_handler)

    if enable_file_logging:
        config.logs_dir.mkdir(parents=True, exist_ok=True)
        log_path = log_file or (config.logs_dir / "gazeauth.log")

        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=config.log.max_file_size,
            backupCount=config.log.backup_count,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)  # File captures everything
        file_handler.setFormatter(JSONFormatter() if json_format else HumanFormatter())
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger for a specific module.

    Args:
        name: Module name (will be prefixed with 'gazeauth.')

    Returns:
        Logger instance
    """
    return logging.getLogger(f"gazeauth.{name}")


class RunLogger:
    """
    Context-managed logger for one experiment cell.

    Creates a per-experiment log file next to the cell's artifacts.
    """

    def __init__(self, exp_id: str, run_dir: Path):
        self.exp_id = exp_id
        self.run_dir = Path(run_dir)
        self.logger = logging.getLogger(f"gazeauth.run.{self._sanitize_name(exp_id)}")
        self.log_path: Optional[Path] = None
        self._file_handler: Optional[logging.Handler] = None

    def __enter__(self) -> "RunLogger":
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.run_dir / "run.log"

        self._file_handler = logging.FileHandler(self.log_path, mode="w", encoding="utf-8")
        self._file_handler.setFormatter(
            JSONFormatter() if get_config().log.json_format else HumanFormatter()
        )
        self._file_handler.setLevel(logging.DEBUG)
        self.logger.addHandler(self._file_handler)

        self.info(f"Experiment started: {self.exp_id}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type:
            self.logger.error(f"Experiment failed with error: {exc_val}",
                              exc_info=True, extra={"exp_id": self.exp_id})
        else:
            self.info("Experiment completed successfully")

        if self._file_handler:
            self.logger.removeHandler(self._file_handler)
            self._file_handler.close()

    @staticmethod
    def _sanitize_name(name: str) -> str:
        """Create a logger-safe name from an experiment id."""
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in name)
        return safe[:50]

    def info(self, message: str, **kwargs):
        """Log info message with optional extra fields."""
        self.logger.info(message, extra={"exp_id": self.exp_id, **kwargs})

    def debug(self, message: str, **kwargs):
        """Log debug message with optional extra fields."""
        self.logger.debug(message, extra={"exp_id": self.exp_id, **kwargs})

    def warning(self, message: str, **kwargs):
        """Log warning message with optional extra fields."""
        self.logger.warning(message, extra={"exp_id": self.exp_id, **kwargs})

    def error(self, message: str, **kwargs):
        """Log error message with optional extra fields."""
        self.logger.error(message, extra={"exp_id": self.exp_id, **kwargs})
