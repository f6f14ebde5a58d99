"""
Synthetic subject signatures and pipeline noise targets.

A signature holds everything that makes one synthetic person's gaze signal
theirs: angle kappa, the true optical-to-visual distortion, a depth-dependent
linear warp, main-sequence kinematics, fixation drift and a noise level.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from ..core.exceptions import ValidationError
from ..core.types import CALIBRATION_DEPTHS_CM, CalibrationModel, Eye, PipelineKind
from ..utils.system import make_rng

KAPPA_RANGE_DEG = (0.5, 6.0)
GAIN_SPREAD = 0.15
OFFSET_RANGE_DEG = 2.0
DEPTH_GAIN_X_RANGE = (0.02, 0.05)
DEPTH_GAIN_Y_RANGE = (0.04, 0.15)
DEPTH_SHEAR = 0.1
VMAX_RANGE = (300.0, 700.0)
C_RANGE = (5.0, 15.0)
DRIFT_RANGE_DEG = (0.02, 0.2)
NEAR_DEPTH_CM = 75


@dataclass(frozen=True)
class PipelineNoise:
    """Signal-quality targets of a gaze-estimation pipeline."""
    pipeline: PipelineKind
    accuracy_bias_deg: float
    s2s_rms_deg: float

    @classmethod
    def for_kind(cls, kind: Union[str, PipelineKind]) -> "PipelineNoise":
        kind = PipelineKind(kind)
        if kind == PipelineKind.NEW:
            return cls(kind, 0.79, 0.20)
        return cls(kind, 1.07, 0.32)

    @classmethod
    def noiseless(cls, kind: Union[str, PipelineKind] = PipelineKind.NEW) -> "PipelineNoise":
        return cls(PipelineKind(kind), 0.0, 0.0)


@dataclass(frozen=True, eq=False)
class SubjectSignature:
    """Ground-truth oculomotor and geometric parameters of one subject."""
    subject_index: int
    subject_id: str
    kappa_left: np.ndarray
    kappa_right: np.ndarray
    gain_left: np.ndarray
    gain_right: np.ndarray
    offset_left: np.ndarray
    offset_right: np.ndarray
    depth_warp_left: np.ndarray
    depth_warp_right: np.ndarray
    vmax: float
    c: float
    drift_deg: float
    noise_mult: float

    def kappa(self, eye: Eye) -> np.ndarray:
        return self.kappa_left if Eye(eye) == Eye.LEFT else self.kappa_right

    def gain(self, eye: Eye) -> np.ndarray:
        return self.gain_left if Eye(eye) == Eye.LEFT else self.gain_right

    def offset(self, eye: Eye) -> np.ndarray:
        return self.offset_left if Eye(eye) == Eye.LEFT else self.offset_right

    def depth_warp(self, eye: Eye) -> np.ndarray:
        return self.depth_warp_left if Eye(eye) == Eye.LEFT else self.depth_warp_right

    def fingerprint(self) -> bytes:
        """Bytes identifying every parameter value."""
        parts = [self.kappa_left, self.kappa_right, self.gain_left, self.gain_right,
                 self.offset_left, self.offset_right, self.depth_warp_left, self.depth_warp_right,
                 np.array([self.vmax,
                           self.c, self.drift_deg, self.noise_mult])]
        return b"".join(np.ascontiguousarray(p, dtype=np.float64).tobytes() for p in parts)


def subject_id_for(index: int) -> str:
    """Stable subject identifier."""
    return f"S{index:05d}"


def _draw_depth_warp(rng: np.random.Generator) -> np.ndarray:
    gx = rng.choice([-1.0, 1.0]) * rng.uniform(*DEPTH_GAIN_X_RANGE)
    gy = rng.choice([-1.0, 1.0]) * rng.uniform(*DEPTH_GAIN_Y_RANGE)
    shear = rng.uniform(-DEPTH_SHEAR, DEPTH_SHEAR)
    return np.array([[1.0 + gx, shear], [0.0, 1.0 + gy]])


def generate_subject_signature(seed: int, subject_index: int) -> SubjectSignature:
    """
    Draw the signature of one synthetic subject.

    Deterministic for (seed, subject_index).

    Args:
        seed: Corpus seed
        subject_index: Subject position in the corpus

    Returns:
        SubjectSignature
    """
    rng = make_rng(seed, "signature", subject_index)

    magnitude = rng.uniform(*KAPPA_RANGE_DEG)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    kappa_left = magnitude * np.array([np.cos(angle), np.sin(angle)])
    # Roughly mirror-symmetric between eyes
    magnitude_r = float(np.clip(magnitude * rng.uniform(0.8, 1.2), *KAPPA_RANGE_DEG))
    angle_r = np.pi - angle + rng.normal(0.0, 0.3)
    kappa_right = magnitude_r * np.array([np.cos(angle_r), np.sin(angle_r)])

    gains = [np.eye(2) + rng.uniform(-GAIN_SPREAD, GAIN_SPREAD, size=(2, 2)) for _ in range(2)]
    offsets = [rng.uniform(-OFFSET_RANGE_DEG, OFFSET_RANGE_DEG, size=2) for _ in range(2)]
    depth_warps = [_draw_depth_warp(rng) for _ in range(2)]

    return SubjectSignature(
        subject_index=subject_index,
        subject_id=subject_id_for(subject_index),
        kappa_left=kappa_left,
        kappa_right=kappa_right,
        gain_left=gains[0],
        gain_right=gains[1],
        offset_left=offsets[0],
        offset_right=offsets[1],
        depth_warp_left=depth_warps[0],
        depth_warp_right=depth_warps[1],
        vmax=float(rng.uniform(*VMAX_RANGE)),
        c=float(rng.uniform(*C_RANGE)),
        drift_deg=float(rng.uniform(*DRIFT_RANGE_DEG)),
        noise_mult=float(np.clip(np.exp(rng.normal(0.0, 0.25)), 0.6, 1.6)),
    )


def vergence_offset_deg(eye: Eye, depth_cm: float, ipd_mm: float = 63.0) -> float:
    """
    Horizontal per-eye vergence term for a target at depth_cm.

    Left eye positive, right eye negative.
    """
    half_ipd_m = ipd_mm / 2000.0
    angle = float(np.degrees(np.arctan(half_ipd_m / (depth_cm / 100.0))))
    return angle if Eye(eye) == Eye.LEFT else -angle


def depth_scale(sig: SubjectSignature, eye: Eye, depth_cm: int) -> np.ndarray:
    """
    Depth-dependent linear warp of the optical estimate.

    Identity at 200 cm. At 75 cm the upper-triangular warp keeps the
    horizontal gain within 5 % while vertical gain and shear vary more.
    """
    return sig.depth_warp(eye) if depth_cm == NEAR_DEPTH_CM else np.eye(2)


def ideal_calibration(sig: SubjectSignature, depth_cm: int, ipd_mm: float = 63.0) -> CalibrationModel:
    """
    Ground-truth calibration for recordings at a target depth.

    Inverts the generative optical model exactly:
    visual = S_d (G optical + b + kappa + vergence_d).
    """
    if depth_cm not in CALIBRATION_DEPTHS_CM:
        raise ValidationError(f"unsupported depth {depth_cm} cm")
    params = {}
    for eye in (Eye.LEFT, Eye.RIGHT):
        scale = depth_scale(sig, eye, depth_cm)
        vergence = np.array([vergence_offset_deg(eye, depth_cm, ipd_mm), 0.0])
        params[f"gain_{eye.value}"] = scale @ sig.gain(eye)
        params[f"offset_{eye.value}"] = scale @ (sig.offset(eye) + sig.kappa(eye) + vergence)
    return CalibrationModel(subject_id=sig.subject_id, fitted_depth_cm=depth_cm, **params)


SIGNATURE_HEADER = [
    "subject_id",
    "kappa_left_yaw", "kappa_left_pitch", "kappa_right_yaw", "kappa_right_pitch",
    "gain_left_00", "gain_left_01", "gain_left_10", "gain_left_11",
    "gain_right_00", "gain_right_01", "gain_right_10", "gain_right_11",
    "offset_left_yaw", "offset_left_pitch", "offset_right_yaw", "offset_right_pitch",
    "depth_warp_left_00", "depth_warp_left_01", "depth_warp_left_10", "depth_warp_left_11",
    "depth_warp_right_00", "depth_warp_right_01", "depth_warp_right_10", "depth_warp_right_11",
    "vmax", "c", "drift_deg", "noise_mult",
]


def write_signatures(signatures: Iterable[SubjectSignature], path: Union[str, Path]) -> Path:
    """
    Write the ground-truth sidecar (never read by training or evaluation).

    Floats use repr so the sidecar is exact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SIGNATURE_HEADER)
        for sig in signatures:
            values: List[float] = [
                *sig.kappa_left, *sig.kappa_right,
                *sig.gain_left.ravel(), *sig.gain_right.ravel(),
                *sig.offset_left, *sig.offset_right,
                *sig.depth_warp_left.ravel(), *sig.depth_warp_right.ravel(),
                sig.vmax, sig.c, sig.drift_deg, sig.noise_mult,
            ]
            writer.writerow([sig.subject_id] + [repr(float(v)) for v in values])
    return path


def _matrix(values, prefix: str) -> np.ndarray:
    return np.array([[values[f"{prefix}_00"], values[f"{prefix}_01"]],
                     [values[f"{prefix}_10"], values[f"{prefix}_11"]]])


def read_signatures(path: Union[str, Path]) -> List[SubjectSignature]:
    """Read a sidecar written by write_signatures."""
    signatures = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for index, row in enumerate(reader):
            v = {k: float(row[k]) for k in SIGNATURE_HEADER[1:]}
            signatures.append(SubjectSignature(
                subject_index=int(row["subject_id"].lstrip("S")) if row["subject_id"].startswith("S") else index,
                subject_id=row["subject_id"],
                kappa_left=np.array([v["kappa_left_yaw"], v["kappa_left_pitch"]]),
                kappa_right=np.array([v["kappa_right_yaw"], v["kappa_right_pitch"]]),
                gain_left=_matrix(v, "gain_left"),
                gain_right=_matrix(v, "gain_right"),
                offset_left=np.array([v["offset_left_yaw"], v["offset_left_pitch"]]),
                offset_right=np.array([v["offset_right_yaw"], v["offset_right_pitch"]]),
                depth_warp_left=_matrix(v, "depth_warp_left"),
                depth_warp_right=_matrix(v, "depth_warp_right"),
                vmax=v["vmax"], c=v["c"], drift_deg=v["drift_deg"], noise_mult=v["noise_mult"],
            ))
    return signatures
