"""
Dense-connectivity 1-D convolutional embedding network.

Eight dilated convolutions, each seeing the concatenation of the input and
every earlier layer's output, followed by global average pooling over time
and a fully connected projection to a 128-d embedding. Embeddings are not
length-normalized here.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.exceptions import ShapeMismatchError, ValidationError

CONV_LAYERS = 8
EMBEDDING_DIM = 128

ACTIVATIONS: Dict[str, Callable[[torch.Tensor], torch.Tensor]] = {
    "gelu": F.gelu,
    "silu": F.silu,
    "tanh": torch.tanh,
    "softplus": F.softplus,
}


@dataclass
class EmbedderConfig:
    """Network shape. conv_layers and embedding_dim are fixed."""
    input_channels: int = 4
    growth: int = 32
    kernel_size: int = 3
    dilations: List[int] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64, 1])
    activation: str = "gelu"
    input_length: int = 360
    conv_layers: int = CONV_LAYERS
    embedding_dim: int = EMBEDDING_DIM

    def __post_init__(self):
        self.dilations = [int(d) for d in self.dilations]
        if self.conv_layers != CONV_LAYERS:
            raise ValidationError(f"conv_layers is fixed at {CONV_LAYERS}")
        if self.embedding_dim != EMBEDDING_DIM:
            raise ValidationError(f"embedding_dim is fixed at {EMBEDDING_DIM}")
        if len(self.dilations) != CONV_LAYERS or min(self.dilations) < 1:
            raise ValidationError(f"need {CONV_LAYERS} positive dilations, got {self.dilations}")
        if self.growth < 1 or self.input_channels < 1 or self.input_length < 1:
            raise ValidationError("growth, input_channels and input_length must be >= 1")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValidationError(f"kernel_size must be odd, got {self.kernel_size}")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(
                f"unknown activation '{self.activation}'",
                suggestions=[f"Choose one of: {', '.join(sorted(ACTIVATIONS))}"],
            )

    def layer_in_channels(self, layer: int) -> int:
        """Input channels of conv layer `layer` (0-based)."""
        return self.input_channels + layer * self.growth

    @property
    def feature_channels(self) -> int:
        """Channels of the final concatenated stack."""
        return self.input_channels + self.conv_layers * self.growth

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class Embedder(nn.Module):
    """Maps (B, T, C) velocity windows to (B, 128) embeddings."""

    def __init__(self, config: EmbedderConfig):
        super().__init__()
        self.config = config
        k = config.kernel_size
        self.convs = nn.ModuleList([
            nn.Conv1d(
                config.layer_in_channels(layer), config.growth, k,
                dilation=d, padding=d * (k - 1) // 2,
            )
            for layer, d in enumerate(config.dilations)
        ])
        self.fc = nn.Linear(config.feature_channels, config.embedding_dim)
        self._act = ACTIVATIONS[config.activation]

    def features(self, x: torch.Tensor) -> List[torch.Tensor]:
        """Channel-first feature stack entering each layer, plus the final stack."""
        h = x.transpose(1, 2)
        stacks = [h]
        for conv in self.convs:
            h = torch.cat([h, self._act(conv(h))], dim=1)
            stacks.append(h)
        return stacks

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc(self.features(x)[-1].mean(dim=2))


def init_params(config: EmbedderConfig, seed: int, dtype: torch.dtype = torch.float32) -> Embedder:
    """
    Build an embedder with deterministic He-style initialization.

    Conv kernels ~ N(0, 2 / fan_in), projection ~ N(0, 1 / fan_in), biases 0.
    """
    model = Embedder(config)
    generator = torch.Generator().manual_seed(int(seed))
    with torch.no_grad():
        for conv in model.convs:
            fan_in = conv.in_channels * conv.kernel_size[0]
            conv.weight.copy_(torch.randn(conv.weight.shape, generator=generator) * math.sqrt(2.0 / fan_in))
            conv.bias.zero_()
        fan_in = model.fc.in_features
        model.fc.weight.copy_(torch.randn(model.fc.weight.shape, generator=generator) * math.sqrt(1.0 / fan_in))
        model.fc.bias.zero_()
    return model.to(dtype)


def _as_batch(model: Embedder, batch: Union[np.ndarray, torch.Tensor]) -> torch.Tensor:
    dtype = next(model.parameters()).dtype
    x = torch.as_tensor(batch).to(dtype)
    cfg = model.config
    if x.ndim != 3 or x.shape[1] != cfg.input_length or x.shape[2] != cfg.input_channels:
        raise ShapeMismatchError(
            f"expected batch of shape (B, {cfg.input_length}, {cfg.input_channels}), got {tuple(x.shape)}"
        )
    return x


def forward(model: Embedder, batch: Union[np.ndarray, torch.Tensor]) -> torch.Tensor:
    """
    Embed a batch without tracking gradients.

    Raises:
        ShapeMismatchError: Batch is not (B, input_length, input_channels)
    """
    x = _as_batch(model, batch)
    with torch.no_grad():
        return model(x)


def backward(
    model: Embedder,
    batch: Union[np.ndarray, torch.Tensor],
    upstream: torch.Tensor,
    embeddings: Optional[torch.Tensor] = None,
) -> Dict[str, torch.Tensor]:
    """
    Parameter gradients of sum(embeddings * upstream).

    Args:
        model: Embedder
        batch: Same batch as the paired forward
        upstream: (B, 128) gradient of the loss w.r.t. the embeddings
        embeddings: Graph-attached output of model(batch) to reuse instead of
            running the forward pass again

    Returns:
        Parameter name -> gradient tensor

    Raises:
        ShapeMismatchError: Upstream gradient does not match the batch
    """
    x = _as_batch(model, batch)
    upstream = torch.as_tensor(upstream).to(x.dtype)
    if upstream.shape != (x.shape[0], model.config.embedding_dim):
        raise ShapeMismatchError(
            f"upstream gradient must be ({x.shape[0]}, {model.config.embedding_dim}), got {tuple(upstream.shape)}"
        )
    names, params = zip(*model.named_parameters())
    if embeddings is None:
        embeddings = model(x)
    grads = torch.autograd.grad(embeddings, params, grad_outputs=upstream)
    return dict(zip(names, grads))


def embed_windows(model: Embedder, batch: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Embeddings of a large stack of windows as float64 numpy, in chunks."""
    out = [forward(model, batch[i:i + chunk]).double().numpy() for i in range(0, len(batch), chunk)]
    if not out:
        return np.empty((0, model.config.embedding_dim))
    return np.concatenate(out, axis=0)
