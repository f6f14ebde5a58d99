"""
Result store for experiment cells.

Provides:
- Result persistence to one JSON file per experiment id
- Loading of every stored result for reports
"""
import json
from pathlib import Path
from typing import List, Optional

from ..experiment.spec import ExperimentResult
from ..logging import get_logger
from ..utils.paths import PathManager
from .models import ResultRecord

logger = get_logger("state.manager")


class ResultStore:
    """
    Persists experiment results.

    Uses JSON files for simple, portable storage; each experiment id has its
    own file, so re-running a cell replaces its previous result.
    """

    def __init__(self, results_dir: Path):
        self.results_dir = Path(results_dir)
        self.results_dir.mkdir(parents=True, exist_ok=True)

    def _result_file(self, exp_id: str) -> Path:
        return self.results_dir / f"{PathManager.safe_filename(exp_id)}.json"

    def save(self, result: ExperimentResult, run_dir: Optional[Path] = None, seed: Optional[int] = None) -> Path:
        """
        Store a result.

        Returns:
            Path of the written JSON file
        """
        record = ResultRecord(result=result, run_dir=str(run_dir) if run_dir else None, seed=seed)
        path = self._result_file(result.exp_id)
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(record.to_dict(), f, indent=2, ensure_ascii=False)
            logger.debug(f"Saved result: {result.exp_id}")
        except OSError as e:
            logger.error(f"Failed to save result {result.exp_id}: {e}")
        return path

    def load_record(self, exp_id: str) -> Optional[ResultRecord]:
        return self._load_path(self._result_file(exp_id))

    def load(self, exp_id: str) -> Optional[ExperimentResult]:
        """Stored result for an experiment id, or None."""
        record = self.load_record(exp_id)
        return record.result if record else None

    def _load_path(self, path: Path) -> Optional[ResultRecord]:
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                return ResultRecord.from_dict(json.load(f))
        except Exception as e:
            logger.warning(f"Skipping unreadable result {path.name}: {e}")
            return None

    def load_all(self) -> List[ExperimentResult]:
        """
        Every readable stored result, ordered by scenario then cell number.

        Unreadable files are skipped with a warning.
        """
        records = [r for r in (self._load_path(p) for p in self.results_dir.glob("*.json")) if r]
        return sorted((r.result for r in records), key=lambda r: _id_sort_key(r.exp_id))

    def delete(self, exp_id: str) -> bool:
        path = self._result_file(exp_id)
        try:
            if path.exists():
                path.unlink()
                logger.debug(f"Deleted result: {exp_id}")
                return True
        except OSError as e:
            logger.error(f"Failed to delete result {exp_id}: {e}")
        return False


def _id_sort_key(exp_id: str):
    prefix, _, number = exp_id.partition("@")
    return (prefix, int(number) if number.isdigit() else 0, exp_id)
