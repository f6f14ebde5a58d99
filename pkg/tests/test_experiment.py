import json

import pytest

from gazeauth.core.config import GridSettings
from gazeauth.core.exceptions import ValidationError
from gazeauth.core.types import Axis, CalibTraining, FilterMode, PipelineKind, Regime, Scenario
from gazeauth.experiment.report import (
    NO_CHANGE, change_marker, format_cell, render_comparison, render_report,
)
from gazeauth.experiment.runner import ExperimentRunner
from gazeauth.experiment.scenarios import (
    CalibrationBank, CalibrationRef, enrollment_calibration, resolve_verification_calibration,
    training_depths,
)
from gazeauth.experiment.spec import (
    ExperimentResult, ExperimentSpec, check_unique_ids, expand_grid, reference_comparisons, reference_grid,
)
from gazeauth.progress import ProgressTracker, Stage, create_reporter
from gazeauth.state import ResultStore


def _result(exp_id, eer=0.0575, eer_sd=0.0013, frr=0.30, frr_sd=0.02, unresolved=False, **factors):
    spec = ExperimentSpec(exp_id, scenario=exp_id.split("@")[0], **factors)
    return ExperimentResult(exp_id, eer, eer_sd, frr, frr_sd, unresolved_far=unresolved,
                            fold_eer=[eer] * 2, fold_frr=[frr] * 2, spec=spec)


# Cells and grids

def test_s3_needs_the_experimental_flag():
    with pytest.raises(ValidationError) as err:
        ExperimentSpec("S3@1", scenario="S3")
    assert "--experimental-s3" in err.value.suggestions[0]
    assert ExperimentSpec("S3@1", scenario="S3", experimental=True).scenario == Scenario.S3


def test_cell_validation():
    with pytest.raises(ValidationError):
        ExperimentSpec("")
    with pytest.raises(ValidationError):
        ExperimentSpec("x", verification_seconds=0)
    with pytest.raises(ValueError):
        ExperimentSpec("x", axis="Z")


def test_training_key_ignores_verification_factors():
    base = ExperimentSpec("a", scenario="S1", axis="V")
    assert ExperimentSpec("b", scenario="S2", axis="V", verification_seconds=10).training_key == base.training_key
    assert ExperimentSpec("c", axis="V", calib_training="Single").training_key != base.training_key


def test_optical_axis_shares_a_model_across_calibration_settings():
    a = ExperimentSpec("a", axis="O", calib_training="All")
    b = ExperimentSpec("b", axis="O", calib_training="Single")
    assert a.training_key == b.training_key == "New-O-na-Config1-Off"


def test_cell_serializes():
    spec = ExperimentSpec("S1@15", calib_training="Single", axis="V", filter="On")
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec
    assert spec.filter_on


def test_result_bounds():
    with pytest.raises(ValidationError, match="outside"):
        ExperimentResult("x", 1.5, 0.0, 0.1, 0.0)
    with pytest.raises(ValidationError):
        ExperimentResult("x", 0.1, -0.01, 0.1, 0.0)


def test_result_round_trip_ignores_runtime():
    result = _result("S1@3", axis="B")
    again = ExperimentResult.from_dict(json.loads(json.dumps(result.to_dict())))
    again.runtime_s = 42.0
    assert again == result


def test_reference_layout_has_twenty_cells_per_scenario():
    specs = reference_grid()
    assert len(specs) == 40
    assert [s.exp_id for s in specs[:3]] == ["S1@1", "S1@2", "S1@3"]
    assert specs[20].exp_id == "S2@1"
    assert len(reference_grid(experimental=True)) == 60
    check_unique_ids(specs)


def test_reference_layout_factors():
    by_id = {s.exp_id: s for s in reference_grid()}

    assert (by_id["S1@1"].axis, by_id["S1@1"].calib_training, by_id["S1@1"].pipeline) == \
        (Axis.OPTICAL, CalibTraining.ALL, PipelineKind.NEW)
    assert by_id["S1@4"].regime == Regime.CONFIG2 and by_id["S1@4"].axis == Axis.BOTH
    assert by_id["S1@5"].filter == FilterMode.ON and by_id["S1@5"].axis == Axis.VISUAL
    assert by_id["S1@7"].pipeline == PipelineKind.OLD
    assert by_id["S1@12"].calib_training == CalibTraining.SINGLE and by_id["S1@12"].pipeline == PipelineKind.NEW
    assert (by_id["S2@18"].calib_training, by_id["S2@18"].pipeline, by_id["S2@18"].axis) == \
        (CalibTraining.SINGLE, PipelineKind.OLD, Axis.BOTH)


def test_comparison_pairs_differ_in_one_factor():
    by_id = {s.exp_id: s for s in reference_grid()}
    changed = {"scenario": "scenario", "calibration": "calib_training", "pipeline": "pipeline"}
    for kind, pairs in reference_comparisons().items():
        for a, b in pairs:
            da, db = by_id[a].to_dict(), by_id[b].to_dict()
            diff = {k for k in da if k != "exp_id" and da[k] != db[k]}
            assert diff == {changed[kind]}, (kind, a, b)


def test_comparison_tables():
    assert reference_comparisons("pipeline")["pipeline"][0] == ("S1@1", "S1@6")
    assert len(reference_comparisons("scenario")["scenario"]) == 12
    with pytest.raises(ValidationError):
        reference_comparisons("axis")


def test_grid_expansion():
    specs = expand_grid(GridSettings())
    assert len(specs) == 24
    assert specs[0].exp_id == "S1@1" and specs[12].exp_id == "S2@1"
    assert (specs[0].calib_training, specs[0].pipeline, specs[0].axis) == (CalibTraining.ALL, PipelineKind.NEW, Axis.OPTICAL)
    assert specs[2].axis == Axis.BOTH


def test_grid_rejects_bad_levels():
    with pytest.raises(ValidationError, match="invalid grid level"):
        expand_grid(GridSettings(axes=["X"]))
    with pytest.raises(ValidationError, match="empty grid factor"):
        expand_grid(GridSettings(regimes=[]))
    with pytest.raises(ValidationError, match="S3"):
        expand_grid(GridSettings(scenarios=["S3"]))
    assert len(expand_grid(GridSettings(scenarios=["S3"], experimental_s3=True))) == 12


def test_duplicate_ids():
    with pytest.raises(ValidationError, match="duplicate"):
        check_unique_ids([ExperimentSpec("a"), ExperimentSpec("a", axis="O")])


# Scenarios

def test_verification_calibration_per_scenario():
    # bob claims to be alice
    assert resolve_verification_calibration("S1", "alice", "bob") == CalibrationRef("bob", 200)
    assert resolve_verification_calibration("S2", "alice", "bob") == CalibrationRef("bob", 75)
    assert resolve_verification_calibration("S3", "alice", "bob") == CalibrationRef("alice", 200)
    assert enrollment_calibration("alice") == CalibrationRef("alice", 200)
    assert str(CalibrationRef("alice", 75)) == "alice@75"


def test_training_depths():
    assert training_depths("All") == (200, 75)
    assert training_depths(CalibTraining.SINGLE) == (200,)


def test_calibration_bank(tiny_dataset):
    bank = CalibrationBank.fit(tiny_dataset)
    sid = tiny_dataset.subjects[0].subject_id

    assert len(bank) == 2 * len(tiny_dataset.subjects)
    assert bank[CalibrationRef(sid, 75)].fitted_depth_cm == 75
    assert bank[(sid, 200)].key == f"{sid}@200"
    with pytest.raises(ValidationError, match="missing calibration model"):
        bank[CalibrationRef("S99999", 200)]


def test_training_windows_follow_axis_and_calibration(tiny_dataset):
    runner = ExperimentRunner(datasets={PipelineKind.NEW: tiny_dataset}, show_progress=False)
    optical = runner.training_windows(ExperimentSpec("o", axis="O"))
    both_all = runner.training_windows(ExperimentSpec("b", axis="B", calib_training="All"))
    both_single = runner.training_windows(ExperimentSpec("s", axis="B", calib_training="Single"))

    train_ids = set(tiny_dataset.train_subject_ids)
    assert {w.subject_id for w in optical} == train_ids
    assert all(w.channels == 4 for w in optical)
    assert all(w.channels == 8 for w in both_all)
    assert len(both_all) == 2 * len(both_single) == 2 * len(optical)


# Reports

def test_cell_format():
    assert format_cell(0.0575, 0.0013) == "5.75 (0.13)"
    assert format_cell(0.0, 0.0) == "0.00 (0.00)"


def test_markdown_report():
    text = render_report([_result("S1@1", axis="O"), _result("S1@2", axis="V", unresolved=True)])
    lines = text.splitlines()
    assert lines[0].startswith("| Exp |")
    assert "| S1@1 | All | New | O | Config1 | Off | 5.75 (0.13) | 30.00 (2.00) |" in lines
    assert "30.00 (2.00) *" in lines[3]
    assert lines[-1].startswith("\\*")


def test_csv_report():
    text = render_report([_result("S1@1")], "csv")
    header, row = text.splitlines()
    assert header == "exp_id,eer_mean_pct,eer_sd_pct,frr_mean_pct,frr_sd_pct,unresolved_far"
    assert row == "S1@1,5.75,0.13,30.00,2.00,0"


def test_report_rejects_empty_and_duplicate_input():
    with pytest.raises(ValidationError, match="no results"):
        render_report([])
    with pytest.raises(ValidationError, match="duplicate"):
        render_report([_result("S1@1"), _result("S1@1")])
    with pytest.raises(ValidationError, match="format"):
        render_report([_result("S1@1")], "html")


def test_change_markers():
    assert change_marker(0.10, 0.03, 0.12, 0.03) == NO_CHANGE
    assert change_marker(0.10, 0.01, 0.05, 0.01) == "↑ -5.00"
    assert change_marker(0.05, 0.01, 0.10, 0.01) == "↓ +5.00"


def test_comparison_table():
    results = [_result("S1@1", eer=0.10, eer_sd=0.01), _result("S1@6", eer=0.20, eer_sd=0.01, pipeline="Old")]
    text = render_comparison(results, [("S1@1", "S1@6")])
    assert "| S1@1 -> S1@6 | B | ↓ +10.00 | — |" in text
    csv_text = render_comparison(results, [("S1@1", "S1@6")], "csv")
    assert csv_text.splitlines()[0] == "comparison,axis,eer_change,frr_change"
    with pytest.raises(ValidationError, match="S1@11"):
        render_comparison(results, [("S1@1", "S1@11")])


# Result store

def test_store_round_trip(tmp_path):
    store = ResultStore(tmp_path / "results")
    result = _result("S1@4", regime="Config2")
    path = store.save(result, run_dir=tmp_path / "S1@4", seed=5)

    assert path.exists()
    assert store.load("S1@4") == result
    assert store.load_record("S1@4").seed == 5
    assert store.load("S1@5") is None


def test_store_orders_ids_numerically_and_skips_bad_files(tmp_path):
    store = ResultStore(tmp_path)
    for exp_id in ("S2@1", "S1@10", "S1@2"):
        store.save(_result(exp_id))
    (tmp_path / "broken.json").write_text("{", encoding="utf-8")

    assert [r.exp_id for r in store.load_all()] == ["S1@2", "S1@10", "S2@1"]


def test_store_replaces_and_deletes(tmp_path):
    store = ResultStore(tmp_path)
    store.save(_result("S1@1", eer=0.2))
    store.save(_result("S1@1", eer=0.1))
    assert store.load("S1@1").eer_mean == 0.1
    assert store.delete("S1@1") is True
    assert store.delete("S1@1") is False
    assert store.load_all() == []


# Progress

def test_weighted_progress():
    tracker = ProgressTracker("S1@1")
    tracker.start_stage(Stage.CALIBRATE, "Fitting")
    tracker.complete_stage()
    assert tracker.overall_progress == pytest.approx(0.05)

    tracker.start_stage(Stage.TRAIN, "Training", total=10)
    tracker.update_stage(completed=5)
    assert tracker.overall_progress == pytest.approx(0.35)


def test_fold_progress_and_status():
    updates = []
    tracker = ProgressTracker("S1@1", on_update=lambda t: updates.append(t.overall_percent))
    tracker.set_folds(4)
    tracker.start_stage(Stage.EVALUATE, "Scoring folds")
    tracker.complete_fold(1)

    assert tracker.stages[Stage.EVALUATE].percent == pytest.approx(50.0)
    assert tracker.get_status_text() == "Scoring folds (fold 2/4)"
    assert len(updates) == 2


def test_quiet_reporter_drives_the_tracker():
    tracker = ProgressTracker("S1@1")
    with create_reporter(tracker, show_progress=False) as reporter:
        reporter.start_stage(Stage.PREPROCESS, "Windows", total=4)
        reporter.update(advance=2)
        assert tracker.current_stage_progress.progress == pytest.approx(0.5)
        reporter.complete_stage()
    assert Stage.PREPROCESS in tracker.completed_stages
