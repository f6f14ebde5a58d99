"""Logging infrastructure."""
from .setup import setup_logging, get_logger, RunLogger

__all__ = ["setup_logging", "get_logger", "RunLogger"]
