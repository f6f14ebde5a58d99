"""
Fold assignment over test subjects.

Seeded shuffle of the test subject ids, then round-robin.
"""
import dataclasses

from ..core.exceptions import InsufficientDataError, ValidationError
from ..core.types import Dataset
from ..utils.system import make_rng


def assign_folds(dataset: Dataset, k: int = 10, seed: int = 0) -> Dataset:
    """
    Partition the test subjects into k folds.

    Args:
        dataset: Dataset with a non-empty test split
        k: Number of folds (>= 2)
        seed: Shuffle seed

    Returns:
        New Dataset with the fold map replaced

    Raises:
        ValidationError: If k < 2
        InsufficientDataError: If there are fewer test subjects than folds
    """
    if k < 2:
        raise ValidationError(f"fold count must be >= 2 (got {k})")
    test_ids = sorted(dataset.test_subject_ids)
    if not test_ids:
        raise InsufficientDataError("test split is empty")
    if len(test_ids) < k:
        raise InsufficientDataError(
            f"{len(test_ids)} test subjects cannot fill {k} folds",
            suggestions=[f"Generate at least {k} test subjects or lower the fold count"],
        )

    order = make_rng(seed, "folds").permutation(len(test_ids))
    folds = {test_ids[j]: i % k for i, j in enumerate(order)}
    return dataclasses.replace(dataset, folds=folds)
