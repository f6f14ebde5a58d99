"""
Binary checkpoint format.

Little-endian layout:
    magic       b"EKYB1"
    config      u32 input_channels, u32 conv_layers, u32 growth,
                u32 kernel_size, u32 input_length, u32 embedding_dim,
                u32 n_dilations, n_dilations x u32,
                u32 len + utf-8 activation name
    u32 tensor count, then per tensor:
                u32 len + utf-8 name, u32 ndim, ndim x u32 dims,
                float32 data in C order
"""
import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np
import torch

from ..core.exceptions import CheckpointError, ValidationError
from ..logging import get_logger
from .embedder import Embedder, EmbedderConfig

logger = get_logger("model.checkpoint")

MAGIC = b"EKYB1"


def _write_u32(f: BinaryIO, value: int):
    f.write(struct.pack("<I", int(value)))


def _write_str(f: BinaryIO, text: str):
    data = text.encode("utf-8")
    _write_u32(f, len(data))
    f.write(data)


def _read_exact(f: BinaryIO, size: int) -> bytes:
    data = f.read(size)
    if len(data) != size:
        raise EOFError(f"expected {size} bytes, got {len(data)}")
    return data


def _read_u32(f: BinaryIO) -> int:
    return struct.unpack("<I", _read_exact(f, 4))[0]


def _read_str(f: BinaryIO) -> str:
    return _read_exact(f, _read_u32(f)).decode("utf-8")


def save_checkpoint(model: Embedder, path: Union[str, Path]) -> Path:
    """Write an embedder's config and float32 parameters."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg = model.config
    state = model.state_dict()
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            for value in (cfg.input_channels, cfg.conv_layers, cfg.growth, cfg.kernel_size,
                          cfg.input_length, cfg.embedding_dim, len(cfg.dilations)):
                _write_u32(f, value)
            for d in cfg.dilations:
                _write_u32(f, d)
            _write_str(f, cfg.activation)

            _write_u32(f, len(state))
            for name, tensor in state.items():
                array = tensor.detach().cpu().numpy().astype("<f4", copy=False)
                _write_str(f, name)
                _write_u32(f, array.ndim)
                for dim in array.shape:
                    _write_u32(f, dim)
                f.write(np.ascontiguousarray(array).tobytes())
    except OSError as e:
        raise CheckpointError(path, str(e))
    logger.debug(f"Wrote checkpoint {path} ({len(state)} tensors)")
    return path


def load_checkpoint(path: Union[str, Path]) -> Embedder:
    """
    Read a checkpoint written by save_checkpoint.

    Raises:
        CheckpointError: Missing file, bad magic, truncation or shape mismatch
    """
    path = Path(path)
    try:
        with open(path, "rb") as f:
            if _read_exact(f, len(MAGIC)) != MAGIC:
                raise CheckpointError(path, "bad magic")
            input_channels, conv_layers, growth, kernel_size, input_length, embedding_dim, n_dil = (
                _read_u32(f) for _ in range(7)
            )
            dilations = [_read_u32(f) for _ in range(n_dil)]
            activation = _read_str(f)
            config = EmbedderConfig(
                input_channels=input_channels, growth=growth, kernel_size=kernel_size,
                dilations=dilations, activation=activation, input_length=input_length,
                conv_layers=conv_layers, embedding_dim=embedding_dim,
            )

            state = {}
            for _ in range(_read_u32(f)):
                name = _read_str(f)
                shape = tuple(_read_u32(f) for _ in range(_read_u32(f)))
                count = int(np.prod(shape)) if shape else 1
                data = np.frombuffer(_read_exact(f, 4 * count), dtype="<f4").reshape(shape)
                state[name] = torch.from_numpy(data.astype(np.float32))
            if f.read(1):
                raise CheckpointError(path, "trailing bytes")
    except FileNotFoundError:
        raise CheckpointError(path, "file not found")
    except (EOFError, UnicodeDecodeError) as e:
        raise CheckpointError(path, f"truncated or corrupt ({e})")
    except ValidationError as e:
        raise CheckpointError(path, e.message)

    model = Embedder(config)
    try:
        model.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointError(path, str(e))
    return model
