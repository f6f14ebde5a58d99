"""
Metric-learning training loop.

Each step: sample a P x K minibatch -> embed -> MS loss -> parameter
gradients -> Adam with the one-cycle learning rate.
"""
import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Union

import torch

from ..core.exceptions import InsufficientDataError, NumericError
from ..logging import get_logger
from ..model.checkpoint import save_checkpoint
from ..model.embedder import Embedder, EmbedderConfig, backward, init_params
from ..utils.system import configure_torch, make_rng
from .config import MsLossConfig, TrainConfig
from .loss import ms_loss
from .optim import AdamState, adam_step
from .sampler import WindowPool, sample_minibatch
from .schedule import one_cycle_lr

logger = get_logger("training.trainer")

HISTORY_HEADER = ["step", "epoch", "lr", "loss"]
CHECKPOINT_NAME = "checkpoint.ekyb"
HISTORY_NAME = "history.csv"


@dataclass
class HistoryRow:
    step: int
    epoch: int
    lr: float
    loss: float


@dataclass
class TrainResult:
    """Trained network and its per-step history."""
    model: Embedder
    history: List[HistoryRow] = field(default_factory=list)
    steps_per_epoch: int = 0
    eligible_subjects: int = 0
    runtime_s: float = 0.0


def steps_per_epoch(pool_size: int, minibatch: int) -> int:
    """Minibatches needed to approximate one pass over the pool."""
    return max(1, math.ceil(pool_size / minibatch))


def write_history(history: List[HistoryRow], path: Union[str, Path]) -> Path:
    """Write step,epoch,lr,loss rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for row in history:
            writer.writerow([row.step, row.epoch, repr(row.lr), repr(row.loss)])
    return path


def train(
    pool: WindowPool,
    embedder_cfg: EmbedderConfig,
    train_cfg: TrainConfig,
    ms_cfg: MsLossConfig = MsLossConfig(),
    out_dir: Optional[Path] = None,
    on_step: Optional[Callable[[int, int, float], None]] = None,
    dtype: torch.dtype = torch.float32,
) -> TrainResult:
    """
    Train an embedder on a window pool.

    Args:
        pool: Standardized training windows by subject
        embedder_cfg: Network shape
        train_cfg: Loop, optimizer and schedule settings
        ms_cfg: Loss hyperparameters
        out_dir: If set, checkpoint and history CSV are written here
        on_step: Callback (step, total_steps, loss) after every step
        dtype: Parameter precision

    Returns:
        TrainResult

    Raises:
        InsufficientDataError: Eligible pool cannot fill a minibatch
        NumericError: Loss became non-finite
    """
    start = time.time()
    configure_torch(train_cfg.threads)

    eligible = pool.eligible(train_cfg.samples_per_user)
    if len(eligible) == 0:
        raise InsufficientDataError(
            f"no subject has {train_cfg.samples_per_user} training windows"
        )
    per_epoch = steps_per_epoch(len(eligible), train_cfg.minibatch)
    total_steps = train_cfg.epochs * per_epoch
    logger.info(
        f"Training on {len(eligible)} windows of {len(eligible.subject_ids)} subjects: "
        f"{train_cfg.epochs} epochs x {per_epoch} steps, m={train_cfg.minibatch}"
    )

    model = init_params(embedder_cfg, train_cfg.seed, dtype=dtype)
    rng = make_rng(train_cfg.seed, "minibatch")
    state = AdamState()
    history: List[HistoryRow] = []

    for step in range(total_steps):
        lr = one_cycle_lr(step / total_steps, train_cfg)
        batch, labels = sample_minibatch(eligible, train_cfg.users_per_batch, train_cfg.samples_per_user, rng)
        x = torch.as_tensor(batch, dtype=dtype)

        embeddings = model(x)
        loss, upstream = ms_loss(embeddings.detach(), labels, ms_cfg)
        if not torch.isfinite(loss):
            raise NumericError(f"non-finite loss at step {step}")
        grads = backward(model, x, upstream, embeddings=embeddings)

        params = {name: p.detach() for name, p in model.named_parameters()}
        updated, state = adam_step(params, grads, state, lr, train_cfg)
        with torch.no_grad():
            for name, p in model.named_parameters():
                p.copy_(updated[name])

        row = HistoryRow(step=step, epoch=step // per_epoch, lr=lr, loss=float(loss))
        history.append(row)
        if step % per_epoch == per_epoch - 1:
            logger.debug(f"epoch {row.epoch} loss {row.loss:.5f} lr {lr:.3g}",
                         extra={"step": step, "epoch": row.epoch})
        if on_step:
            on_step(step + 1, total_steps, row.loss)

    result = TrainResult(
        model=model,
        history=history,
        steps_per_epoch=per_epoch,
        eligible_subjects=len(eligible.subject_ids),
        runtime_s=time.time() - start,
    )
    if out_dir is not None:
        out_dir = Path(out_dir)
        save_checkpoint(model, out_dir / CHECKPOINT_NAME)
        write_history(history, out_dir / HISTORY_NAME)
    logger.info(f"Training finished in {result.runtime_s:.1f}s, final loss {history[-1].loss:.5f}")
    return result
