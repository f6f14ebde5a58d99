"""
On-disk dataset format.

Layout under the dataset root:
- manifest.csv: one row per recording
  (subject_id,recording_id,task,target_depth_cm,split,fold,samples_file)
- samples/<recording_id>.csv: one row per sample
  (t,left_opt_yaw,left_opt_pitch,right_opt_yaw,right_opt_pitch,tgt_yaw,tgt_pitch,valid)

Floats are rendered with 9 significant digits and NaN as ``nan``.
"""
import csv
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from ..core.exceptions import DatasetFormatError, DatasetIOError, ValidationError
from ..core.types import Dataset, Recording, Split, SubjectRecord, Task
from ..logging import get_logger

logger = get_logger("dataset.storage")

MANIFEST_NAME = "manifest.csv"
SAMPLES_DIR = "samples"
MANIFEST_HEADER = ["subject_id", "recording_id", "task", "target_depth_cm",
                   "split", "fold", "samples_file"]
SAMPLES_HEADER = ["t", "left_opt_yaw", "left_opt_pitch", "right_opt_yaw",
                  "right_opt_pitch", "tgt_yaw", "tgt_pitch", "valid"]


def format_float(value: float) -> str:
    """Render a float with 9 significant digits (NaN -> 'nan')."""
    return "%.9g" % value


def quantize_array(values: np.ndarray) -> np.ndarray:
    """Round every element to what format_float would write."""
    values = np.asarray(values, dtype=np.float64)
    flat = np.fromiter((float(format_float(v)) for v in values.ravel()),
                       dtype=np.float64, count=values.size)
    return flat.reshape(values.shape)


def quantize_recording(rec: Recording) -> Recording:
    """Copy of a recording whose values survive a save/load round-trip bitwise."""
    return Recording(
        subject_id=rec.subject_id,
        recording_id=rec.recording_id,
        task=rec.task,
        target_depth_cm=rec.target_depth_cm,
        t=quantize_array(rec.t),
        left=quantize_array(rec.left),
        right=quantize_array(rec.right),
        target=quantize_array(rec.target),
        valid=rec.valid,
        sample_rate_hz=rec.sample_rate_hz,
    )


def _samples_file_name(recording_id: str) -> str:
    return f"{SAMPLES_DIR}/{recording_id}.csv"


def _write_samples(rec: Recording, path: Path):
    columns = np.column_stack([rec.t, rec.left, rec.right, rec.target])
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(SAMPLES_HEADER) + "\n")
        for row, valid in zip(columns, rec.valid):
            f.write(",".join(format_float(v) for v in row))
            f.write(",1\n" if valid else ",0\n")


def save_dataset(dataset: Dataset, root_path: Union[str, Path]) -> None:
    """
    Write a dataset as manifest + one samples file per recording.

    Args:
        dataset: Dataset to write
        root_path: Target directory (created if missing)

    Raises:
        ValidationError: On duplicate recording ids
        DatasetIOError: On filesystem failures
    """
    root = Path(root_path)
    seen = set()
    for rec in dataset.recordings():
        if rec.recording_id in seen:
            raise ValidationError(f"duplicate recording_id {rec.recording_id}")
        seen.add(rec.recording_id)

    try:
        (root / SAMPLES_DIR).mkdir(parents=True, exist_ok=True)
        manifest_path = root / MANIFEST_NAME
        with open(manifest_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(MANIFEST_HEADER)
            for subject in dataset.subjects:
                sid = subject.subject_id
                split = dataset.split[sid]
                fold = dataset.folds.get(sid)
                for rec in subject.recordings:
                    samples_file = _samples_file_name(rec.recording_id)
                    writer.writerow([
                        sid, rec.recording_id, rec.task.value, rec.target_depth_cm,
                        split.value, "" if fold is None else fold, samples_file,
                    ])
                    _write_samples(rec, root / samples_file)
    except OSError as e:
        raise DatasetIOError(e.filename or root, str(e))

    logger.info(f"Saved {len(seen)} recordings of {len(dataset.subjects)} subjects to {root}")


def _parse_float(text: str, path: Path, line: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DatasetFormatError(path, f"column '{column}': not a number: {text!r}", line)


def _read_samples(path: Path, meta: Dict[str, str]) -> Recording:
    rows: List[List[float]] = []
    valid: List[bool] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != SAMPLES_HEADER:
            raise DatasetFormatError(path, f"bad header {header}", 1)
        for line, record in enumerate(reader, start=2):
            if len(record) != len(SAMPLES_HEADER):
                raise DatasetFormatError(path, f"expected {len(SAMPLES_HEADER)} fields, got {len(record)}", line)
            rows.append([_parse_float(v, path, line, c) for v, c in zip(record[:7], SAMPLES_HEADER)])
            if record[7] not in ("0", "1"):
                raise DatasetFormatError(path, f"valid must be 0 or 1, got {record[7]!r}", line)
            valid.append(record[7] == "1")

    data = np.array(rows, dtype=np.float64).reshape(-1, 7)
    try:
        return Recording(
            subject_id=meta["subject_id"],
            recording_id=meta["recording_id"],
            task=Task(meta["task"]),
            target_depth_cm=int(meta["target_depth_cm"]),
            t=data[:, 0],
            left=data[:, 1:3],
            right=data[:, 3:5],
            target=data[:, 5:7],
            valid=np.array(valid, dtype=bool),
        )
    except ValidationError as e:
        raise DatasetFormatError(path, e.message)


def _read_manifest(path: Path) -> List[Tuple[int, Dict[str, str]]]:
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise DatasetFormatError(path, f"bad header {header}", 1)
        for line, record in enumerate(reader, start=2):
            if len(record) != len(MANIFEST_HEADER):
                raise DatasetFormatError(path, f"expected {len(MANIFEST_HEADER)} fields, got {len(record)}", line)
            meta = dict(zip(MANIFEST_HEADER, record))
            if meta["task"] not in {t.value for t in Task}:
                raise DatasetFormatError(path, f"unknown task {meta['task']!r}", line)
            if meta["split"] not in {s.value for s in Split}:
                raise DatasetFormatError(path, f"unknown split {meta['split']!r}", line)
            if meta["target_depth_cm"] not in ("75", "200"):
                raise DatasetFormatError(path, f"unsupported depth {meta['target_depth_cm']!r}", line)
            if meta["fold"] and not meta["fold"].isdigit():
                raise DatasetFormatError(path, f"fold must be a non-negative integer, got {meta['fold']!r}", line)
            entries.append((line, meta))
    return entries


def load_dataset(root_path: Union[str, Path]) -> Dataset:
    """
    Read a dataset written by save_dataset, validating every invariant.

    Args:
        root_path: Dataset directory

    Returns:
        Dataset

    Raises:
        DatasetFormatError: Malformed manifest or samples file (file + line)
        ValidationError: Missing samples file or violated dataset invariants
    """
    root = Path(root_path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise ValidationError(f"manifest not found: {manifest_path}")

    by_subject: "OrderedDict[str, List[Recording]]" = OrderedDict()
    split: Dict[str, Split] = {}
    folds: Dict[str, int] = {}

    for line, meta in _read_manifest(manifest_path):
        sid = meta["subject_id"]
        subject_split = Split(meta["split"])
        if split.setdefault(sid, subject_split) != subject_split:
            raise DatasetFormatError(manifest_path, f"subject {sid} listed in both splits", line)
        if meta["fold"]:
            if subject_split != Split.TEST:
                raise DatasetFormatError(manifest_path, f"train subject {sid} has a fold", line)
            folds[sid] = int(meta["fold"])

        samples_path = root / meta["samples_file"]
        if not samples_path.exists():
            raise ValidationError(
                f"samples file for recording {meta['recording_id']} not found: {samples_path}"
            )
        by_subject.setdefault(sid, []).append(_read_samples(samples_path, meta))

    subjects = []
    for sid, recordings in by_subject.items():
        calibrations = sorted(
            (r for r in recordings if r.task == Task.CALIBRATION),
            key=lambda r: 0 if r.target_depth_cm == 200 else 1,
        )
        tasks = [r for r in recordings if r.task == Task.RANDOM_SACCADE]
        subjects.append(SubjectRecord(sid, tuple(calibrations), tuple(tasks)))

    dataset = Dataset(subjects=tuple(subjects), split=split, folds=folds)
    logger.info(f"Loaded {len(subjects)} subjects from {root}")
    return dataset
