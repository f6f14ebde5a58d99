"""
Stored result records.

Wraps an ExperimentResult with bookkeeping for persistence.
"""
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, Optional

from ..experiment.spec import ExperimentResult


@dataclass
class ResultRecord:
    """
    Serializable experiment result.

    Includes the artifact directory so reports can point at scores and
    checkpoints.
    """
    result: ExperimentResult
    created_at: str = field(default_factory=lambda: datetime.now().isoformat())
    run_dir: Optional[str] = None
    seed: Optional[int] = None

    @property
    def exp_id(self) -> str:
        return self.result.exp_id

    def to_dict(self) -> Dict[str, Any]:
        return {
            "result": self.result.to_dict(),
            "created_at": self.created_at,
            "run_dir": self.run_dir,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResultRecord":
        return cls(
            result=ExperimentResult.from_dict(data["result"]),
            created_at=data.get("created_at", ""),
            run_dir=data.get("run_dir"),
            seed=data.get("seed"),
        )
