"""Synthetic subjects, recordings and corpora."""
from .corpus import generate_dataset, generate_signatures
from .recording import Saccade, generate_recording, plan_saccades, recording_id_for
from .signature import (
    PipelineNoise, SubjectSignature, generate_subject_signature, ideal_calibration,
    read_signatures, vergence_offset_deg, write_signatures,
)

__all__ = [
    "generate_dataset", "generate_signatures",
    "Saccade", "generate_recording", "plan_saccades", "recording_id_for",
    "PipelineNoise", "SubjectSignature", "generate_subject_signature", "ideal_calibration",
    "read_signatures", "vergence_offset_deg", "write_signatures",
]
