"""
Which calibration model produces visual-axis gaze at enrollment and
verification time.
"""
from typing import Dict, Iterable, NamedTuple, Tuple, Union

from ..calibration.fit import fit_calibration
from ..core.exceptions import ValidationError
from ..core.types import CalibrationModel, CalibTraining, Dataset, Scenario, TASK_DEPTH_CM
from ..logging import get_logger

logger = get_logger("experiment.scenarios")

NEAR_DEPTH_CM = 75


class CalibrationRef(NamedTuple):
    """Reference to a subject's model fitted at one depth."""
    subject_id: str
    depth_cm: int

    def __str__(self) -> str:
        return f"{self.subject_id}@{self.depth_cm}"


def resolve_verification_calibration(
    scenario: Union[Scenario, str],
    claimed_subject: str,
    actual_subject: str,
) -> CalibrationRef:
    """
    Calibration used for a verification attempt.

    S1 uses the verifier's own 200 cm model, S2 the verifier's 75 cm
    model, S3 the claimed (enrolled) subject's 200 cm model.
    """
    scenario = Scenario(scenario)
    if scenario == Scenario.S1:
        return CalibrationRef(actual_subject, TASK_DEPTH_CM)
    if scenario == Scenario.S2:
        return CalibrationRef(actual_subject, NEAR_DEPTH_CM)
    return CalibrationRef(claimed_subject, TASK_DEPTH_CM)


def enrollment_calibration(subject_id: str) -> CalibrationRef:
    """Enrollment always uses the enrollee's 200 cm model."""
    return CalibrationRef(subject_id, TASK_DEPTH_CM)


def training_depths(calib_training: Union[CalibTraining, str]) -> Tuple[int, ...]:
    """Calibration depths producing training-time visual estimates."""
    if CalibTraining(calib_training) == CalibTraining.ALL:
        return (TASK_DEPTH_CM, NEAR_DEPTH_CM)
    return (TASK_DEPTH_CM,)


class CalibrationBank:
    """Fitted calibration models of a dataset, keyed by (subject, depth)."""

    def __init__(self, models: Dict[CalibrationRef, CalibrationModel]):
        self.models = dict(models)

    @classmethod
    def fit(cls, dataset: Dataset, subject_ids: Iterable[str] = None) -> "CalibrationBank":
        """Fit both calibration recordings of every (selected) subject."""
        ids = list(subject_ids) if subject_ids is not None else [s.subject_id for s in dataset.subjects]
        models = {}
        for sid in ids:
            for rec in dataset.subject(sid).calibration_recordings:
                model = fit_calibration(rec)
                models[CalibrationRef(sid, rec.target_depth_cm)] = model
        logger.debug(f"Fitted {len(models)} calibration models for {len(ids)} subjects")
        return cls(models)

    def __len__(self) -> int:
        return len(self.models)

    def __getitem__(self, ref: CalibrationRef) -> CalibrationModel:
        """
        Raises:
            ValidationError: No model for the reference
        """
        try:
            return self.models[CalibrationRef(*ref)]
        except KeyError:
            raise ValidationError(f"missing calibration model {CalibrationRef(*ref)}")
