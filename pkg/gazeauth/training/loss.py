"""
Multi-similarity loss with online pair mining.

For anchor i with positives P_i and negatives N_i (cosine similarities S):

    L_i = 1/alpha * log(1 + sum_{k in P_i} exp(-alpha (S_ik - lam)))
        + 1/beta  * log(1 + sum_{k in N_i} exp( beta (S_ik - lam)))

averaged over the m anchors of the minibatch. Mining keeps only the
informative pairs and is treated as a non-differentiable selection.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
import torch

from ..core.exceptions import ShapeMismatchError, ValidationError, ZeroNormError
from .config import MsLossConfig


@dataclass(frozen=True)
class MinedPairs:
    """Boolean (m, m) masks; row i holds anchor i's kept pairs."""
    positives: torch.Tensor
    negatives: torch.Tensor

    def positive_indices(self, anchor: int) -> List[int]:
        return torch.nonzero(self.positives[anchor]).flatten().tolist()

    def negative_indices(self, anchor: int) -> List[int]:
        return torch.nonzero(self.negatives[anchor]).flatten().tolist()


def encode_labels(labels: Sequence) -> torch.Tensor:
    """Integer class codes for arbitrary hashable labels."""
    _, codes = np.unique(np.asarray(labels), return_inverse=True)
    return torch.as_tensor(codes.reshape(-1), dtype=torch.long)


def mine_pairs(sim: Union[np.ndarray, torch.Tensor], labels: Sequence, epsilon: float) -> MinedPairs:
    """
    Select informative pairs for every anchor.

    A negative k is kept iff S_ik > min_p S_ip - epsilon; a positive k is
    kept iff S_ik < max_n S_in + epsilon. Both inequalities are strict.
    Anchors without any positive or any negative get empty sets.
    """
    sim = torch.as_tensor(sim).detach()
    codes = encode_labels(labels)
    m = sim.shape[0]
    if sim.shape != (m, m) or codes.shape[0] != m:
        raise ShapeMismatchError(f"similarity matrix {tuple(sim.shape)} does not match {codes.shape[0]} labels")

    same = codes[:, None] == codes[None, :]
    eye = torch.eye(m, dtype=torch.bool)
    pos_all = same & ~eye
    neg_all = ~same

    inf = torch.tensor(float("inf"), dtype=sim.dtype)
    hardest_pos = torch.where(pos_all, sim, inf).min(dim=1).values
    hardest_neg = torch.where(neg_all, sim, -inf).max(dim=1).values
    usable = (pos_all.any(dim=1) & neg_all.any(dim=1))[:, None]

    negatives = neg_all & (sim > (hardest_pos - epsilon)[:, None]) & usable
    positives = pos_all & (sim < (hardest_neg + epsilon)[:, None]) & usable
    return MinedPairs(positives=positives, negatives=negatives)


def cosine_matrix(embeddings: torch.Tensor) -> torch.Tensor:
    """
    Pairwise cosine similarities of row vectors.

    Raises:
        ZeroNormError: A row has zero length
    """
    norms = embeddings.norm(dim=1, keepdim=True)
    if bool((norms == 0).any()):
        row = int(torch.nonzero(norms.flatten() == 0)[0])
        raise ZeroNormError(f"embedding row {row}")
    unit = embeddings / norms
    return unit @ unit.T


def ms_loss(
    embeddings: Union[np.ndarray, torch.Tensor],
    labels: Sequence,
    cfg: MsLossConfig = MsLossConfig(),
) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Multi-similarity loss and its gradient with respect to the raw embeddings.

    Args:
        embeddings: (m, d) raw (not normalized) embeddings
        labels: m class labels
        cfg: Loss hyperparameters

    Returns:
        (scalar loss, (m, d) gradient)

    Raises:
        ValidationError: Fewer than two embeddings
        ZeroNormError: A zero-length embedding
    """
    e = torch.as_tensor(embeddings).detach().clone().requires_grad_(True)
    if e.ndim != 2 or e.shape[0] < 2:
        raise ValidationError(f"ms_loss needs at least two embeddings, got shape {tuple(e.shape)}")

    sim = cosine_matrix(e)
    mined = mine_pairs(sim, labels, cfg.epsilon)

    zero = torch.zeros((), dtype=sim.dtype)
    pos_sum = torch.where(mined.positives, torch.exp(-cfg.alpha * (sim - cfg.lam)), zero).sum(dim=1)
    neg_sum = torch.where(mined.negatives, torch.exp(cfg.beta * (sim - cfg.lam)), zero).sum(dim=1)
    per_anchor = torch.log1p(pos_sum) / cfg.alpha + torch.log1p(neg_sum) / cfg.beta
    loss = per_anchor.mean()

    (grad,) = torch.autograd.grad(loss, e)
    return loss.detach(), grad
