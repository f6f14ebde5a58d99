"""
System utilities for reproducibility and process control.
"""
import hashlib
from typing import Union

import numpy as np


def configure_torch(threads: int = 1, deterministic: bool = True):
    """
    Pin torch to a fixed thread count and deterministic kernels.

    Bit-identical checkpoints across runs require the same reduction order,
    which depends on the intra-op thread count.

    Args:
        threads: Intra-op CPU threads
        deterministic: Request deterministic algorithms
    """
    import torch

    torch.set_num_threads(max(1, int(threads)))
    if deterministic:
        torch.use_deterministic_algorithms(True)


def _key_to_int(key: Union[int, str]) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFF
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def make_rng(seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """
    Independent, reproducible generator for a (seed, keys...) stream.

    Args:
        seed: Master seed
        keys: Stream identifiers (ints or strings such as recording ids)

    Returns:
        numpy Generator
    """
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
