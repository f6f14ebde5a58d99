"""Utility modules."""
from .paths import PathManager
from .system import configure_torch, make_rng

__all__ = ["PathManager", "configure_torch", "make_rng"]
