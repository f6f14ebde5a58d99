import dataclasses
import filecmp

import numpy as np
import pytest
from scipy.optimize import brentq

from gazeauth.calibration.fit import apply_calibration
from gazeauth.calibration.quality import s2s_precision, spatial_accuracy
from gazeauth.core.config import SynthConfig
from gazeauth.core.exceptions import ValidationError
from gazeauth.core.types import SAMPLE_RATE_HZ, Eye, Split, Task
from gazeauth.dataset.storage import save_dataset
from gazeauth.synth.corpus import generate_dataset, generate_signatures
from gazeauth.synth.recording import (
    generate_recording, peak_velocity, plan_saccades, raised_cosine_progress, recording_id_for,
)
from gazeauth.synth.signature import (
    DEPTH_GAIN_X_RANGE, KAPPA_RANGE_DEG, PipelineNoise, depth_scale, generate_subject_signature,
    ideal_calibration, read_signatures, vergence_offset_deg, write_signatures,
)


def test_signature_is_deterministic():
    a = generate_subject_signature(42, 17)
    b = generate_subject_signature(42, 17)
    assert a.fingerprint() == b.fingerprint()
    assert a.subject_id == "S00017"


def test_kappa_magnitudes_within_range():
    sigs = [generate_subject_signature(1, i) for i in range(1000)]
    for sig in sigs:
        for eye in (Eye.LEFT, Eye.RIGHT):
            magnitude = float(np.linalg.norm(sig.kappa(eye)))
            assert KAPPA_RANGE_DEG[0] - 1e-12 <= magnitude <= KAPPA_RANGE_DEG[1] + 1e-12


def test_signatures_are_distinct():
    prints = {generate_subject_signature(1, i).fingerprint() for i in range(1000)}
    assert len(prints) == 1000


def test_depth_warp_is_identity_far_and_bounded_near():
    sig = generate_subject_signature(5, 2)
    for eye in (Eye.LEFT, Eye.RIGHT):
        np.testing.assert_array_equal(depth_scale(sig, eye, 200), np.eye(2))
        near = depth_scale(sig, eye, 75)
        assert DEPTH_GAIN_X_RANGE[0] <= abs(near[0, 0] - 1.0) <= DEPTH_GAIN_X_RANGE[1]
        assert near[1, 0] == 0.0


def test_vergence_sign_and_size():
    left = vergence_offset_deg(Eye.LEFT, 75, 63.0)
    assert left == pytest.approx(np.degrees(np.arctan(0.0315 / 0.75)))
    assert vergence_offset_deg(Eye.RIGHT, 75, 63.0) == -left
    assert vergence_offset_deg(Eye.LEFT, 200) < left


def test_signature_sidecar_round_trip(tmp_path, tiny_synth):
    sigs = generate_signatures(tiny_synth)
    loaded = read_signatures(write_signatures(sigs, tmp_path / "signatures.csv"))
    assert [s.fingerprint() for s in loaded] == [s.fingerprint() for s in sigs]
    assert [s.subject_id for s in loaded] == [s.subject_id for s in sigs]


def test_thirty_seconds_is_2160_samples(tiny_synth):
    cfg = dataclasses.replace(tiny_synth, task_duration_s=30.0)
    rec = generate_recording(generate_subject_signature(0, 0), Task.RANDOM_SACCADE, 200,
                             PipelineNoise.for_kind("New"), cfg, seed=0)
    assert len(rec) == 2160
    assert rec.t[-1] == pytest.approx(2159 / 72)


def test_duration_shorter_than_one_dwell(tiny_synth):
    cfg = dataclasses.replace(tiny_synth, task_duration_s=0.5)
    with pytest.raises(ValidationError, match="too short"):
        generate_recording(generate_subject_signature(0, 0), Task.RANDOM_SACCADE, 200,
                           PipelineNoise.noiseless(), cfg, seed=0)


def test_unsupported_depth(tiny_synth):
    with pytest.raises(ValidationError, match="depth"):
        generate_recording(generate_subject_signature(0, 0), Task.CALIBRATION, 100,
                           PipelineNoise.noiseless(), tiny_synth, seed=0)


def test_recording_is_deterministic(tiny_synth):
    sig = generate_subject_signature(0, 3)
    a = generate_recording(sig, Task.RANDOM_SACCADE, 200, PipelineNoise.for_kind("Old"), tiny_synth, seed=9)
    b = generate_recording(sig, Task.RANDOM_SACCADE, 200, PipelineNoise.for_kind("Old"), tiny_synth, seed=9)
    assert a.equals(b)


def test_task_recordings_with_different_index_differ(tiny_synth):
    sig = generate_subject_signature(0, 3)
    pipeline = PipelineNoise.for_kind("New")
    a = generate_recording(sig, Task.RANDOM_SACCADE, 200, pipeline, tiny_synth, 0,
                           recording_id=recording_id_for(sig.subject_id, Task.RANDOM_SACCADE, 200, 1))
    b = generate_recording(sig, Task.RANDOM_SACCADE, 200, pipeline, tiny_synth, 0,
                           recording_id=recording_id_for(sig.subject_id, Task.RANDOM_SACCADE, 200, 2))
    assert not np.array_equal(a.target, b.target)


def test_calibration_recording_shows_nine_point_grid(tiny_synth):
    rec = generate_recording(generate_subject_signature(0, 0), Task.CALIBRATION, 200,
                             PipelineNoise.noiseless(), tiny_synth, seed=0)
    assert len(rec.dwell_intervals()) == 9
    assert len(np.unique(rec.target, axis=0)) == 9


def test_main_sequence_peak_velocity_saturates():
    sig = generate_subject_signature(0, 0)
    small, large = peak_velocity(sig, 2.0), peak_velocity(sig, 40.0)
    assert 0 < small < large < sig.vmax


def test_saccade_profile_reaches_target():
    u = np.linspace(0.0, 1.0, 11)
    progress = raised_cosine_progress(u)
    assert progress[0] == 0.0
    assert progress[-1] == pytest.approx(1.0)
    assert np.all(np.diff(progress) >= 0)


def test_saccades_land_on_targets():
    sig = generate_subject_signature(0, 1)
    targets = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 5.0]])
    plan = plan_saccades(sig, targets, dwell_n=72)
    assert [s.amplitude_deg for s in plan] == pytest.approx([10.0, 5.0])
    assert plan[0].onset_s == pytest.approx(1.0)
    assert plan[0].duration_s == pytest.approx(2 * 10.0 / plan[0].peak_velocity)


def test_measured_peak_velocity_rises_with_amplitude(tiny_synth, still_signature):
    model = ideal_calibration(still_signature, 200, tiny_synth.ipd_mm)
    amplitudes, peaks = [], []
    for index in range(1, 5):
        rec = generate_recording(
            still_signature, Task.RANDOM_SACCADE, 200, PipelineNoise.noiseless(), tiny_synth, seed=0,
            recording_id=recording_id_for(still_signature.subject_id, Task.RANDOM_SACCADE, 200, index),
        )
        gaze = rec.left @ model.gain(Eye.LEFT).T + model.offset(Eye.LEFT)
        onsets = np.flatnonzero(np.any(np.diff(rec.target, axis=0) != 0, axis=1)) + 1
        for k in onsets:
            if k + 1 >= len(gaze) or not rec.valid[k:k + 2].all():
                continue
            amplitude = float(np.linalg.norm(rec.target[k] - rec.target[k - 1]))
            covered = float(np.linalg.norm(gaze[k + 1] - gaze[k])) / amplitude
            # the first in-flight sample pins the duration of the raised-cosine profile
            u = brentq(lambda v: float(raised_cosine_progress(np.array(v))) - covered, 0.0, 1.0, xtol=1e-14)
            amplitudes.append(amplitude)
            peaks.append(2.0 * amplitude * u * SAMPLE_RATE_HZ)

    assert len(peaks) > 50
    assert peaks == pytest.approx([peak_velocity(still_signature, a) for a in amplitudes], rel=1e-6)
    by_amplitude = np.array(peaks)[np.argsort(amplitudes)]
    assert np.all(np.diff(by_amplitude) >= -1e-9)



def test_noiseless_recording_inverts_ideal_calibration(tiny_synth, still_signature):
    rec = generate_recording(still_signature, Task.CALIBRATION, 75, PipelineNoise.noiseless(), tiny_synth, seed=2)
    model = ideal_calibration(still_signature, 75, tiny_synth.ipd_mm)
    rows = [i for lo, hi in rec.dwell_intervals() for i in range(lo + 30, hi)]
    rows = np.array([i for i in rows if rec.valid[i]])
    for eye in (Eye.LEFT, Eye.RIGHT):
        visual = rec.eye(eye)[rows] @ model.gain(eye).T + model.offset(eye)
        np.testing.assert_allclose(visual, rec.target[rows], atol=1e-9)


def test_corpus_counts_and_split(tiny_synth):
    cfg = dataclasses.replace(tiny_synth, task_recordings=1)
    dataset = generate_dataset(cfg, PipelineNoise.for_kind("New"))

    assert len(list(dataset.recordings())) == (3 + 2) * 3
    assert len(dataset.train_subject_ids) == 3
    assert len(dataset.test_subject_ids) == 2
    assert dataset.n_folds == 2
    assert all(dataset.split[sid] == Split.TEST for sid in dataset.folds)


def test_corpus_is_byte_identical_across_runs(tmp_path, tiny_synth):
    progress = []
    first = generate_dataset(tiny_synth, PipelineNoise.for_kind("New"), on_subject=lambda d, t: progress.append(d))
    second = generate_dataset(dataclasses.replace(tiny_synth, workers=2), PipelineNoise.for_kind("New"))
    save_dataset(first, tmp_path / "a")
    save_dataset(second, tmp_path / "b")

    assert progress == [1, 2, 3, 4, 5]
    names = sorted(p.name for p in (tmp_path / "a" / "samples").iterdir())
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a" / "samples", tmp_path / "b" / "samples", names, shallow=False)
    assert mismatch == [] and errors == []
    assert filecmp.cmp(tmp_path / "a" / "manifest.csv", tmp_path / "b" / "manifest.csv", shallow=False)


@pytest.mark.slow
@pytest.mark.parametrize("kind,accuracy,precision", [("New", 0.79, 0.20), ("Old", 1.07, 0.32)])
def test_pipeline_quality_targets(kind, accuracy, precision):
    cfg = SynthConfig(n_train_subjects=15, n_test_subjects=10, task_duration_s=30.0, task_recordings=2, folds=2)
    dataset = generate_dataset(cfg, PipelineNoise.for_kind(kind))
    signatures = {s.subject_id: s for s in generate_signatures(cfg)}
    accuracies, precisions = [], []
    for rec in dataset.recordings():
        if rec.task != Task.RANDOM_SACCADE:
            continue
        gaze = apply_calibration(ideal_calibration(signatures[rec.subject_id], 200, cfg.ipd_mm), rec)
        accuracies.append(spatial_accuracy(rec, gaze))
        precisions.append(s2s_precision(rec, gaze))

    assert len(accuracies) == 50
    assert float(np.median(accuracies)) == pytest.approx(accuracy, rel=0.2)
    assert float(np.median(precisions)) == pytest.approx(precision, rel=0.2)
