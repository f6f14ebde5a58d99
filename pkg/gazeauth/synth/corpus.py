"""
Multi-subject synthetic corpus assembly.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

from ..core.config import SynthConfig
from ..core.types import CALIBRATION_DEPTHS_CM, TASK_DEPTH_CM, Dataset, Split, SubjectRecord, Task
from ..dataset.folds import assign_folds
from ..dataset.storage import quantize_recording
from ..logging import get_logger
from .recording import generate_recording, recording_id_for
from .signature import PipelineNoise, SubjectSignature, generate_subject_signature

logger = get_logger("synth.corpus")


def generate_signatures(cfg: SynthConfig) -> List[SubjectSignature]:
    """Signatures of every corpus subject, train subjects first."""
    total = cfg.n_train_subjects + cfg.n_test_subjects
    return [generate_subject_signature(cfg.seed, i) for i in range(total)]


def _generate_subject(sig: SubjectSignature, pipeline: PipelineNoise, cfg: SynthConfig) -> SubjectRecord:
    calibrations = tuple(
        quantize_recording(generate_recording(sig, Task.CALIBRATION, depth, pipeline, cfg, cfg.seed))
        for depth in CALIBRATION_DEPTHS_CM
    )
    tasks = tuple(
        quantize_recording(generate_recording(
            sig, Task.RANDOM_SACCADE, TASK_DEPTH_CM, pipeline, cfg, cfg.seed,
            recording_id=recording_id_for(sig.subject_id, Task.RANDOM_SACCADE, TASK_DEPTH_CM, index),
        ))
        for index in range(1, cfg.task_recordings + 1)
    )
    return SubjectRecord(sig.subject_id, calibrations, tasks)


def generate_dataset(
    cfg: SynthConfig,
    pipeline: PipelineNoise,
    on_subject: Optional[Callable[[int, int], None]] = None,
) -> Dataset:
    """
    Generate a complete corpus with split and folds.

    Recordings are rounded to the on-disk precision, so a saved and
    reloaded corpus is bitwise identical to the returned one.

    Args:
        cfg: Synthetic corpus configuration
        pipeline: Signal-quality targets
        on_subject: Progress callback (done, total)

    Returns:
        Dataset

    Raises:
        ConfigError: Invalid configuration
        ValidationError: Propagated from recording generation or fold assignment
    """
    cfg.validate()
    signatures = generate_signatures(cfg)
    total = len(signatures)
    logger.info(
        f"Generating {total} subjects ({cfg.n_train_subjects} train, {cfg.n_test_subjects} test), "
        f"{pipeline.pipeline.value} pipeline, seed {cfg.seed}"
    )

    subjects: List[SubjectRecord] = []
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            # map preserves order
            for subject in pool.map(lambda s: _generate_subject(s, pipeline, cfg), signatures):
                subjects.append(subject)
                if on_subject:
                    on_subject(len(subjects), total)
    else:
        for sig in signatures:
            subjects.append(_generate_subject(sig, pipeline, cfg))
            if on_subject:
                on_subject(len(subjects), total)

    split = {
        sig.subject_id: Split.TRAIN if i < cfg.n_train_subjects else Split.TEST
        for i, sig in enumerate(signatures)
    }
    dataset = Dataset(subjects=tuple(subjects), split=split)
    return assign_folds(dataset, k=cfg.folds, seed=cfg.seed)
