import csv

import numpy as np
import pytest

from gazeauth.calibration.fit import apply_calibration, apply_to_series, dwell_windows, fit_calibration
from gazeauth.calibration.geometry import angular_distance_deg
from gazeauth.calibration.quality import (
    dispersion_deg, measure_dataset, s2s_precision, spatial_accuracy, summarize, write_quality_report,
)
from gazeauth.core.exceptions import InsufficientDataError, UnderdeterminedCalibrationError, ValidationError
from gazeauth.core.types import CalibrationModel, Eye, GazeSeries, Recording, Task
from gazeauth.synth.signature import ideal_calibration, vergence_offset_deg

DWELL = 108


def _grid_recording(targets, dwell=DWELL, left=None, right=None, task=Task.CALIBRATION):
    targets = np.asarray(targets, dtype=float)
    trace = np.repeat(targets, dwell, axis=0)
    n = len(trace)
    return Recording(
        subject_id="S00001",
        recording_id="S00001-hand",
        task=task,
        target_depth_cm=200,
        t=np.arange(n) / 72,
        left=trace.copy() if left is None else left,
        right=trace.copy() if right is None else right,
        target=trace,
        valid=np.ones(n, dtype=bool),
    )


NINE_POINTS = [(y, p) for p in (-10.0, 0.0, 10.0) for y in (-10.0, 0.0, 10.0)]


def test_identity_optics_give_identity_model():
    model = fit_calibration(_grid_recording(NINE_POINTS))

    for eye in (Eye.LEFT, Eye.RIGHT):
        np.testing.assert_allclose(model.gain(eye), np.eye(2), atol=1e-9)
        np.testing.assert_allclose(model.offset(eye), 0.0, atol=1e-9)
    assert model.fit_rmse_deg == pytest.approx(0.0, abs=1e-9)
    assert model.key == "S00001@200"


def test_recovers_known_affine_map(noiseless_calibration, still_signature, tiny_synth):
    rec = noiseless_calibration(200)
    fitted = fit_calibration(rec)
    truth = ideal_calibration(still_signature, 200, tiny_synth.ipd_mm)

    for eye in (Eye.LEFT, Eye.RIGHT):
        np.testing.assert_allclose(fitted.gain(eye), truth.gain(eye), atol=1e-6)
        np.testing.assert_allclose(fitted.offset(eye), truth.offset(eye), atol=1e-6)


def test_recovers_near_depth_map(noiseless_calibration, still_signature, tiny_synth):
    fitted = fit_calibration(noiseless_calibration(75))
    truth = ideal_calibration(still_signature, 75, tiny_synth.ipd_mm)

    assert fitted.fitted_depth_cm == 75
    for eye in (Eye.LEFT, Eye.RIGHT):
        np.testing.assert_allclose(fitted.gain(eye), truth.gain(eye), atol=1e-6)
        np.testing.assert_allclose(fitted.offset(eye), truth.offset(eye), atol=1e-6)


def test_two_targets_are_underdetermined():
    with pytest.raises(UnderdeterminedCalibrationError, match="underdetermined calibration"):
        fit_calibration(_grid_recording([(0.0, 0.0), (5.0, 5.0)]))


def test_collinear_targets_are_underdetermined():
    with pytest.raises(UnderdeterminedCalibrationError, match="collinear"):
        fit_calibration(_grid_recording([(-5.0, 0.0), (0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]))


def test_task_recording_is_rejected():
    with pytest.raises(ValidationError, match="not Calibration"):
        fit_calibration(_grid_recording(NINE_POINTS, task=Task.RANDOM_SACCADE))


def test_dwell_windows_trim_both_ends():
    rec = _grid_recording(NINE_POINTS[:3])
    assert dwell_windows(rec) == [(22, 86), (130, 194), (238, 302)]


def test_offset_shifts_yaw():
    rec = _grid_recording(NINE_POINTS)
    gaze = apply_calibration(CalibrationModel.identity("S00001", offset=(1.0, 0.0)), rec)

    np.testing.assert_allclose(gaze.left[:, 0], rec.left[:, 0] + 1.0)
    np.testing.assert_allclose(gaze.right[:, 1], rec.right[:, 1])


def test_identity_model_is_a_no_op():
    rec = _grid_recording(NINE_POINTS)
    gaze = apply_calibration(CalibrationModel.identity("S00001"), rec)
    np.testing.assert_array_equal(gaze.left, rec.left)
    np.testing.assert_array_equal(gaze.right, rec.right)


def test_nan_samples_stay_nan():
    series = GazeSeries(np.array([[np.nan, np.nan], [1.0, 2.0]]), np.array([[0.0, 0.0], [np.nan, np.nan]]))
    out = apply_to_series(CalibrationModel.identity("S00001", offset=(0.5, 0.5)), series)
    assert np.isnan(out.left[0]).all() and np.isnan(out.right[1]).all()
    np.testing.assert_allclose(out.left[1], [1.5, 2.5])


def test_near_model_on_far_data_shows_vergence_delta(noiseless_calibration, tiny_synth):
    near_model = fit_calibration(noiseless_calibration(75))
    far = noiseless_calibration(200)
    gaze = apply_calibration(near_model, far)

    per_dwell = []
    for lo, hi in dwell_windows(far):
        rows = np.arange(lo, hi)[far.valid[lo:hi]]
        per_dwell.append(np.mean(gaze.left[rows, 0] - far.target[rows, 0]))
    delta = vergence_offset_deg(Eye.LEFT, 75, tiny_synth.ipd_mm) - vergence_offset_deg(Eye.LEFT, 200, tiny_synth.ipd_mm)

    assert delta == pytest.approx(1.503, abs=1e-3)
    assert float(np.mean(per_dwell)) == pytest.approx(delta, abs=0.1)


# Signal quality

EQUATOR = [(-5.0, 0.0), (0.0, 0.0), (5.0, 0.0)]


def test_perfect_gaze_has_zero_error(noiseless_calibration, still_signature, tiny_synth):
    rec = noiseless_calibration(200)
    gaze = apply_calibration(ideal_calibration(still_signature, 200, tiny_synth.ipd_mm), rec)
    assert spatial_accuracy(rec, gaze) == pytest.approx(0.0, abs=1e-9)
    assert s2s_precision(rec, gaze) == pytest.approx(0.0, abs=1e-9)


def test_constant_yaw_offset_is_measured_exactly():
    rec = _grid_recording(EQUATOR)
    gaze = apply_calibration(CalibrationModel.identity("S00001", offset=(1.0, 0.0)), rec)
    assert spatial_accuracy(rec, gaze) == pytest.approx(1.0, abs=1e-6)
    assert spatial_accuracy(rec, gaze, binocular=False) == pytest.approx(1.0, abs=1e-6)


def test_oscillating_dwell_is_excluded():
    targets = EQUATOR + [(0.0, 5.0)]
    rec = _grid_recording(targets)
    gaze = rec.left.copy()
    for k, offset in enumerate((0.5, 1.0, 1.5)):
        gaze[k * DWELL:(k + 1) * DWELL, 0] += offset
    wobble = slice(3 * DWELL, 4 * DWELL)
    gaze[wobble, 0] += np.where(np.arange(DWELL) % 2 == 0, 20.0, -20.0)
    series = GazeSeries(gaze, gaze.copy())

    assert spatial_accuracy(rec, series) == pytest.approx(1.0, abs=1e-6)


def test_constant_gaze_has_zero_precision():
    rec = _grid_recording(EQUATOR)
    assert s2s_precision(rec, GazeSeries.optical(rec)) == 0.0


def test_alternating_yaw_precision():
    rec = _grid_recording(EQUATOR)
    gaze = rec.left.copy()
    gaze[:, 0] += np.where(np.arange(len(rec)) % 2 == 0, 0.1, -0.1)
    assert s2s_precision(rec, GazeSeries(gaze, gaze.copy())) == pytest.approx(0.2, abs=1e-4)


def test_blinked_recording_has_no_fixations():
    rec = _grid_recording(EQUATOR)
    blinked = Recording(rec.subject_id, rec.recording_id, rec.task, rec.target_depth_cm, rec.t,
                        np.full_like(rec.left, np.nan), np.full_like(rec.right, np.nan), rec.target,
                        np.zeros(len(rec), dtype=bool))
    with pytest.raises(InsufficientDataError, match="no valid fixations"):
        spatial_accuracy(blinked, GazeSeries.optical(blinked))


def test_dispersion_of_small_cluster():
    assert dispersion_deg(np.array([[0.0, 0.0]])) == 0.0
    assert dispersion_deg(np.array([[0.0, 0.0], [3.0, 0.0], [1.0, 0.0]])) == pytest.approx(3.0)


def test_angular_distance_small_angles():
    a = np.array([[0.0, 0.0]])
    assert angular_distance_deg(a, a + [1e-7, 0.0])[0] == pytest.approx(1e-7, rel=1e-6)


def test_dataset_quality_report(tmp_path, tiny_dataset):
    models = {s.subject_id: fit_calibration(s.calibration_at(200)) for s in tiny_dataset.subjects}
    rows = measure_dataset(tiny_dataset, models, include_optical=True)

    assert len(rows) == 2 * len(list(tiny_dataset.recordings()))
    optical, visual = summarize(rows, "O"), summarize(rows, "V")
    assert optical["accuracy_deg"] > visual["accuracy_deg"]
    assert summarize(rows, "B") is None

    path = write_quality_report(rows, tmp_path / "quality.csv")
    with open(path, newline="") as f:
        written = list(csv.DictReader(f))
    assert len(written) == len(rows)
    assert {r["axis"] for r in written} == {"O", "V"}
