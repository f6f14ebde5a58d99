"""
Experiment cells: factor settings, results and grid enumeration.

Provides:
- ExperimentSpec, one cell of the factor grid
- ExperimentResult, fold-aggregated metrics of a cell
- expand_grid for arbitrary cross-products
- reference_grid for the 20-cells-per-scenario reference layout
- reference_comparisons for the before/after change tables
"""
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

from ..core.config import GridSettings
from ..core.exceptions import ValidationError
from ..core.types import Axis, CalibTraining, FilterMode, PipelineKind, Regime, Scenario


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment cell."""
    exp_id: str
    scenario: Scenario = Scenario.S1
    calib_training: CalibTraining = CalibTraining.ALL
    pipeline: PipelineKind = PipelineKind.NEW
    axis: Axis = Axis.BOTH
    regime: Regime = Regime.CONFIG1
    filter: FilterMode = FilterMode.OFF
    verification_seconds: int = 20
    experimental: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "calib_training", CalibTraining(self.calib_training))
        object.__setattr__(self, "pipeline", PipelineKind(self.pipeline))
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "filter", FilterMode(self.filter))
        if not self.exp_id:
            raise ValidationError("experiment id must not be empty")
        if self.scenario == Scenario.S3 and not self.experimental:
            raise ValidationError(
                f"{self.exp_id}: scenario S3 is a pilot",
                suggestions=["Pass --experimental-s3 to enable it"],
            )
        if self.verification_seconds <= 0:
            raise ValidationError(f"{self.exp_id}: verification_seconds must be positive")

    @property
    def filter_on(self) -> bool:
        return self.filter == FilterMode.ON

    @property
    def training_key(self) -> str:
        """
        Identifies the trained model a cell needs.

        Scenario and verification duration only matter at verification
        time, and the optical axis ignores calibration, so cells differing
        only in those share one model.
        """
        calib = "na" if self.axis == Axis.OPTICAL else self.calib_training.value
        return "-".join([self.pipeline.value, self.axis.value, calib, self.regime.value, self.filter.value])

    def describe(self) -> str:
        return (
            f"{self.exp_id}: {self.scenario.value} {self.calib_training.value}/{self.pipeline.value} "
            f"axis {self.axis.value}, {self.regime.value}, filter {self.filter.value}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exp_id": self.exp_id,
            "scenario": self.scenario.value,
            "calib_training": self.calib_training.value,
            "pipeline": self.pipeline.value,
            "axis": self.axis.value,
            "regime": self.regime.value,
            "filter": self.filter.value,
            "verification_seconds": self.verification_seconds,
            "experimental": self.experimental,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentSpec":
        return cls(
            exp_id=data["exp_id"],
            scenario=data["scenario"],
            calib_training=data["calib_training"],
            pipeline=data["pipeline"],
            axis=data["axis"],
            regime=data["regime"],
            filter=data["filter"],
            verification_seconds=data.get("verification_seconds", 20),
            experimental=data.get("experimental", False),
        )


@dataclass
class ExperimentResult:
    """
    Fold-aggregated metrics of one cell, as fractions.

    runtime_s is excluded from equality so repeated runs compare equal.
    """
    exp_id: str
    eer_mean: float
    eer_sd: float
    frr_mean: float
    frr_sd: float
    unresolved_far: bool = False
    fold_eer: List[float] = field(default_factory=list)
    fold_frr: List[float] = field(default_factory=list)
    spec: Optional[ExperimentSpec] = None
    runtime_s: float = field(default=0.0, compare=False)

    def __post_init__(self):
        for name in ("eer_mean", "frr_mean"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{self.exp_id}: {name} {value} outside [0, 1]")
        if self.eer_sd < 0 or self.frr_sd < 0:
            raise ValidationError(f"{self.exp_id}: standard deviations must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exp_id": self.exp_id,
            "eer_mean": self.eer_mean,
            "eer_sd": self.eer_sd,
            "frr_mean": self.frr_mean,
            "frr_sd": self.frr_sd,
            "unresolved_far": self.unresolved_far,
            "fold_eer": list(self.fold_eer),
            "fold_frr": list(self.fold_frr),
            "spec": self.spec.to_dict() if self.spec else None,
            "runtime_s": self.runtime_s,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentResult":
        spec = data.get("spec")
        return cls(
            exp_id=data["exp_id"],
            eer_mean=data["eer_mean"],
            eer_sd=data["eer_sd"],
            frr_mean=data["frr_mean"],
            frr_sd=data["frr_sd"],
            unresolved_far=data.get("unresolved_far", False),
            fold_eer=list(data.get("fold_eer", [])),
            fold_frr=list(data.get("fold_frr", [])),
            spec=ExperimentSpec.from_dict(spec) if spec else None,
            runtime_s=data.get("runtime_s", 0.0),
        )


def check_unique_ids(specs: List[ExperimentSpec]):
    """
    Raises:
        ValidationError: Two cells share an exp_id
    """
    seen = set()
    for spec in specs:
        if spec.exp_id in seen:
            raise ValidationError(f"duplicate experiment id {spec.exp_id}")
        seen.add(spec.exp_id)


def expand_grid(settings: GridSettings, verification_seconds: int = 20) -> List[ExperimentSpec]:
    """
    Cross-product of the grid factors.

    Cells are numbered per scenario in enumeration order, so ids read
    "S1@1", "S1@2", ... for every scenario.

    Raises:
        ValidationError: Unknown factor level, S3 without the experimental
            flag, or an empty factor list
    """
    factors: List[Tuple[str, list]] = []
    try:
        factors = [
            ("calib_training", [CalibTraining(v) for v in settings.calib_training]),
            ("pipeline", [PipelineKind(v) for v in settings.pipelines]),
            ("axis", [Axis(v) for v in settings.axes]),
            ("regime", [Regime(v) for v in settings.regimes]),
            ("filter", [FilterMode(v) for v in settings.filters]),
        ]
        scenarios = [Scenario(v) for v in settings.scenarios]
    except ValueError as e:
        raise ValidationError(f"invalid grid level: {e}")
    empty = [name for name, levels in factors if not levels] + ([] if scenarios else ["scenarios"])
    if empty:
        raise ValidationError(f"empty grid factor(s): {', '.join(empty)}")

    specs = []
    names = [name for name, _ in factors]
    for scenario in scenarios:
        for index, combo in enumerate(itertools.product(*(levels for _, levels in factors)), start=1):
            specs.append(ExperimentSpec(
                exp_id=f"{scenario.value}@{index}",
                scenario=scenario,
                verification_seconds=verification_seconds,
                experimental=settings.experimental_s3,
                **dict(zip(names, combo)),
            ))
    check_unique_ids(specs)
    return specs


# Per (calibration, pipeline) block: (axis, regime, filter)
_BLOCK_ROWS = (
    (Axis.OPTICAL, Regime.CONFIG1, FilterMode.OFF),
    (Axis.VISUAL, Regime.CONFIG1, FilterMode.OFF),
    (Axis.BOTH, Regime.CONFIG1, FilterMode.OFF),
    (Axis.BOTH, Regime.CONFIG2, FilterMode.OFF),
    (Axis.VISUAL, Regime.CONFIG1, FilterMode.ON),
)
_BLOCKS = (
    (CalibTraining.ALL, PipelineKind.NEW),
    (CalibTraining.ALL, PipelineKind.OLD),
    (CalibTraining.SINGLE, PipelineKind.NEW),
    (CalibTraining.SINGLE, PipelineKind.OLD),
)


def reference_grid(experimental: bool = False, verification_seconds: int = 20) -> List[ExperimentSpec]:
    """
    The reference layout: 20 cells per scenario.

    Cells 1-5 are All/New, 6-10 All/Old, 11-15 Single/New and 16-20
    Single/Old; within a block the rows are O, V, B, B with Config2, and
    V with the filter on. S3 cells are added only when experimental.
    """
    scenarios = [Scenario.S1, Scenario.S2] + ([Scenario.S3] if experimental else [])
    specs = []
    for scenario in scenarios:
        index = 0
        for calib, pipeline in _BLOCKS:
            for axis, regime, filter_mode in _BLOCK_ROWS:
                index += 1
                specs.append(ExperimentSpec(
                    exp_id=f"{scenario.value}@{index}",
                    scenario=scenario,
                    calib_training=calib,
                    pipeline=pipeline,
                    axis=axis,
                    regime=regime,
                    filter=filter_mode,
                    verification_seconds=verification_seconds,
                    experimental=experimental,
                ))
    return specs


def reference_comparisons(kind: Union[str, None] = None) -> Dict[str, List[Tuple[str, str]]]:
    """
    Before/after pairs of the reference change tables.

    Args:
        kind: One of "scenario", "calibration", "pipeline"; None returns all

    Returns:
        kind -> list of (baseline exp_id, changed exp_id)
    """
    tables = {
        "scenario": [(f"S1@{k}", f"S2@{k}") for k in (1, 2, 3, 6, 7, 8, 11, 12, 13, 16, 17, 18)],
        "calibration": [(f"S1@{k}", f"S1@{k + 10}") for k in (1, 2, 3, 5, 6, 7, 8, 10)],
        "pipeline": [(f"S1@{k}", f"S1@{k + 5}") for k in (1, 2, 3, 5, 11, 12, 13, 15)],
    }
    if kind is None:
        return tables
    if kind not in tables:
        raise ValidationError(f"unknown comparison table '{kind}'", suggestions=[f"Use one of {sorted(tables)}"])
    return {kind: tables[kind]}
