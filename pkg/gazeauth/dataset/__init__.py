"""Dataset storage and fold assignment."""
from .folds import assign_folds
from .storage import load_dataset, quantize_recording, save_dataset

__all__ = ["assign_folds", "load_dataset", "quantize_recording", "save_dataset"]
