"""
Functional Adam.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import torch

from ..core.exceptions import ShapeMismatchError
from .config import TrainConfig

Params = Dict[str, torch.Tensor]


@dataclass
class AdamState:
    """First/second moment estimates and the step counter."""
    step: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params: Params) -> "AdamState":
        return cls(
            step=0,
            m={k: torch.zeros_like(p) for k, p in params.items()},
            v={k: torch.zeros_like(p) for k, p in params.items()},
        )


def adam_step(
    params: Params,
    grads: Params,
    state: AdamState,
    lr: float,
    cfg: TrainConfig,
) -> Tuple[Params, AdamState]:
    """
    One bias-corrected Adam update. Inputs are not modified.

    Raises:
        ShapeMismatchError: Gradient or state tensors do not match the parameters
    """
    if not state.m:
        state = AdamState.zeros_like(params)
    if set(grads) != set(params) or set(state.m) != set(params):
        raise ShapeMismatchError("parameter, gradient and state names differ")

    step = state.step + 1
    bias1 = 1.0 - cfg.beta1 ** step
    bias2 = 1.0 - cfg.beta2 ** step
    new_params, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape or state.m[name].shape != p.shape or state.v[name].shape != p.shape:
            raise ShapeMismatchError(f"shape mismatch for {name}: param {tuple(p.shape)}, grad {tuple(g.shape)}")
        m = state.m[name] * cfg.beta1 + g * (1.0 - cfg.beta1)
        v = state.v[name] * cfg.beta2 + g * g * (1.0 - cfg.beta2)
        denom = v.sqrt() / math.sqrt(bias2) + cfg.eps
        new_params[name] = p - (m / denom) * (lr / bias1)
        new_m[name], new_v[name] = m, v
    return new_params, AdamState(step=step, m=new_m, v=new_v)
