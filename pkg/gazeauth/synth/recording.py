"""
Synthetic recording generator.

Per eye e at target depth d the emitted optical-axis signal is

    visual_obs = visual_true + bias(visual_true) + noise_e
    x          = S_e(d)^-1 visual_obs - kappa_e - vergence_e(d)
    optical    = G_e^-1 (x - b_e)

where visual_true follows a jumping-dot schedule with main-sequence saccades
and fixation drift, bias is a smooth per-recording field shared by both eyes,
S_e(d) is the depth warp (identity at 200 cm) and (G_e, b_e) the subject's
true affine distortion.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from ..calibration.geometry import angular_distance_deg
from ..core.config import SynthConfig
from ..core.exceptions import ValidationError
from ..core.types import CALIBRATION_DEPTHS_CM, SAMPLE_RATE_HZ, Eye, Recording, Task
from ..utils.system import make_rng
from .signature import PipelineNoise, SubjectSignature, depth_scale, vergence_offset_deg

CALIBRATION_GRID_FRACTION = 0.75
BLINK_FRACTION = 0.002
BLINK_RUN = (5, 15)
BIAS_COMPONENTS = 8


@dataclass(frozen=True)
class Saccade:
    """One planned saccade of the visual axis."""
    onset_s: float
    amplitude_deg: float
    peak_velocity: float
    duration_s: float


def peak_velocity(sig: SubjectSignature, amplitude_deg: float) -> float:
    """Main-sequence peak velocity Vmax * (1 - exp(-A / c)) in deg/s."""
    return sig.vmax * (1.0 - math.exp(-amplitude_deg / sig.c))


def raised_cosine_progress(u: np.ndarray) -> np.ndarray:
    """Fraction of the amplitude covered at normalized time u in [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return u - np.sin(2.0 * np.pi * u) / (2.0 * np.pi)


def target_schedule(task: Task, cfg: SynthConfig, rng: np.random.Generator) -> Tuple[np.ndarray, int, int]:
    """
    Stimulus positions and timing for a recording.

    Returns:
        (targets, samples_per_dwell, total_samples)

    Raises:
        ValidationError: If the duration does not hold one full dwell
    """
    if task == Task.CALIBRATION:
        dwell_n = int(round(cfg.calibration_dwell_s * SAMPLE_RATE_HZ))
        a = CALIBRATION_GRID_FRACTION * cfg.fov_half_deg
        grid = np.array([(y, p) for p in (-a, 0.0, a) for y in (-a, 0.0, a)])
        targets = grid[rng.permutation(len(grid))]
        return targets, dwell_n, dwell_n * len(targets)

    dwell_n = int(round(cfg.dwell_s * SAMPLE_RATE_HZ))
    n = int(round(cfg.task_duration_s * SAMPLE_RATE_HZ))
    if dwell_n < 1 or n < dwell_n:
        raise ValidationError(
            f"task duration {cfg.task_duration_s} s is too short for one {cfg.dwell_s} s dwell"
        )
    n_targets = -(-n // dwell_n)
    targets = rng.uniform(-cfg.fov_half_deg, cfg.fov_half_deg, size=(n_targets, 2))
    return targets, dwell_n, n


def plan_saccades(sig: SubjectSignature, targets: np.ndarray, dwell_n: int,
                  drift: Optional[np.ndarray] = None) -> List[Saccade]:
    """
    Saccade plan for a target schedule.

    Each saccade starts at the target jump, from where drift left the eye,
    and lands on the new target.
    """
    plan = []
    dwell_s = dwell_n / SAMPLE_RATE_HZ
    for j in range(1, len(targets)):
        start = targets[j - 1] if drift is None else targets[j - 1] + drift[j - 1]
        amplitude = float(np.linalg.norm(targets[j] - start))
        vp = peak_velocity(sig, amplitude)
        duration = 2.0 * amplitude / vp if amplitude > 0 else 0.0
        plan.append(Saccade(j * dwell_s, amplitude, vp, duration))
    return plan


def visual_trajectory(sig: SubjectSignature, targets: np.ndarray, dwell_n: int, n: int,
                      rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    True visual-axis gaze and the stimulus trace.

    Returns:
        (gaze, target_trace), both (n, 2)
    """
    directions = rng.normal(size=(len(targets), 2))
    directions /= np.maximum(np.linalg.norm(directions, axis=1, keepdims=True), 1e-12)
    # Drift reached at the end of each dwell
    drift_end = sig.drift_deg * directions
    plan = plan_saccades(sig, targets, dwell_n, drift_end)

    index = np.arange(n)
    dwell = index // dwell_n
    t_rel = (index - dwell * dwell_n) / SAMPLE_RATE_HZ
    dwell_s = dwell_n / SAMPLE_RATE_HZ

    target_trace = targets[dwell]
    gaze = target_trace + drift_end[dwell] * (t_rel / dwell_s)[:, None]

    for j, saccade in enumerate(plan, start=1):
        if saccade.duration_s <= 0:
            continue
        rows = np.flatnonzero((dwell == j) & (t_rel < saccade.duration_s))
        if rows.size == 0:
            continue
        start = targets[j - 1] + drift_end[j - 1]
        progress = raised_cosine_progress(t_rel[rows] / saccade.duration_s)
        gaze[rows] += (start - targets[j]) * (1.0 - progress)[:, None]
    return gaze, target_trace


class BiasField:
    """
    Smooth random displacement field over the field of view.

    Sum of low-frequency Fourier components; the same field applies to both eyes.
    """

    def __init__(self, fov_half_deg: float, rng: np.random.Generator, components: int = BIAS_COMPONENTS):
        angles = rng.uniform(0.0, 2.0 * np.pi, size=components)
        freq = rng.uniform(0.3, 1.0, size=components) * np.pi / (2.0 * fov_half_deg)
        self.wavevectors = np.stack([np.cos(angles), np.sin(angles)], axis=1) * freq[:, None]
        self.phases = rng.uniform(0.0, 2.0 * np.pi, size=components)
        self.amplitudes = rng.normal(size=(components, 2))
        self.scale = 1.0

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        waves = np.cos(positions @ self.wavevectors.T + self.phases)
        return self.scale * (waves @ self.amplitudes)

    def fit_median(self, positions: np.ndarray, median_deg: float):
        """Rescale so the median angular displacement at positions equals median_deg."""
        self.scale = 1.0
        if median_deg <= 0:
            self.scale = 0.0
            return
        current = float(np.median(angular_distance_deg(positions + self(positions), positions)))
        self.scale = median_deg / current if current > 1e-12 else 0.0


def _blink_mask(n: int, rng: np.random.Generator) -> np.ndarray:
    valid = np.ones(n, dtype=bool)
    mean_run = 0.5 * (BLINK_RUN[0] + BLINK_RUN[1])
    for _ in range(rng.poisson(BLINK_FRACTION * n / mean_run)):
        length = int(rng.integers(BLINK_RUN[0], BLINK_RUN[1] + 1))
        start = int(rng.integers(0, max(1, n - length)))
        valid[start:start + length] = False
    return valid


def per_eye_noise_sigma(pipeline: PipelineNoise, sig: SubjectSignature) -> float:
    """
    Per-eye, per-axis white-noise sigma.

    Independent eyes average to a cyclopean sigma of s2s / 2, whose
    consecutive-sample RMS distance is s2s.
    """
    return pipeline.s2s_rms_deg * sig.noise_mult / math.sqrt(2.0)


def recording_id_for(subject_id: str, task: Task, depth_cm: int, index: int = 1) -> str:
    if task == Task.CALIBRATION:
        return f"{subject_id}-cal{depth_cm}"
    return f"{subject_id}-rs{index}"


def generate_recording(
    sig: SubjectSignature,
    task: Union[Task, str],
    depth_cm: int,
    pipeline: PipelineNoise,
    cfg: SynthConfig,
    seed: int,
    recording_id: Optional[str] = None,
) -> Recording:
    """
    Generate one recording of a synthetic subject.

    Values are exact (not rounded to the on-disk precision).

    Args:
        sig: Subject signature
        task: Calibration or RandomSaccade
        depth_cm: Target depth (75 or 200)
        pipeline: Signal-quality targets
        cfg: Synthetic corpus configuration
        seed: Corpus seed
        recording_id: Identifier (derived from subject, task and depth if None)

    Returns:
        Recording

    Raises:
        ValidationError: Unsupported depth or a duration shorter than one dwell
    """
    task = Task(task)
    if depth_cm not in CALIBRATION_DEPTHS_CM:
        raise ValidationError(f"unsupported target depth {depth_cm} cm")
    recording_id = recording_id or recording_id_for(sig.subject_id, task, depth_cm)
    rng = make_rng(seed, "recording", recording_id)

    targets, dwell_n, n = target_schedule(task, cfg, rng)
    visual_true, target_trace = visual_trajectory(sig, targets, dwell_n, n, rng)

    field = BiasField(cfg.fov_half_deg, rng)
    field.fit_median(targets, pipeline.accuracy_bias_deg)
    visual_biased = visual_true + field(visual_true)

    sigma = per_eye_noise_sigma(pipeline, sig)
    optical = {}
    for eye in (Eye.LEFT, Eye.RIGHT):
        observed = visual_biased + sigma * rng.normal(size=(n, 2)) if sigma > 0 else visual_biased
        scale = depth_scale(sig, eye, depth_cm)
        vergence = np.array([vergence_offset_deg(eye, depth_cm, cfg.ipd_mm), 0.0])
        x = np.linalg.solve(scale, observed.T).T - sig.kappa(eye) - vergence
        optical[eye] = np.linalg.solve(sig.gain(eye), (x - sig.offset(eye)).T).T

    valid = _blink_mask(n, rng)
    for eye in optical:
        optical[eye][~valid] = np.nan

    return Recording(
        subject_id=sig.subject_id,
        recording_id=recording_id,
        task=task,
        target_depth_cm=depth_cm,
        t=np.arange(n) / SAMPLE_RATE_HZ,
        left=optical[Eye.LEFT],
        right=optical[Eye.RIGHT],
        target=target_trace,
        valid=valid,
    )
