"""Embedding network and checkpoint format."""
from .checkpoint import load_checkpoint, save_checkpoint
from .embedder import Embedder, EmbedderConfig, backward, embed_windows, forward, init_params

__all__ = [
    "load_checkpoint", "save_checkpoint",
    "Embedder", "EmbedderConfig", "backward", "embed_windows", "forward", "init_params",
]
