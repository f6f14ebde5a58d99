import dataclasses

import pytest

from gazeauth.core.config import Config, SynthConfig, TrainSettings
from gazeauth.core.types import PipelineKind
from gazeauth.experiment.runner import ExperimentRunner, load_trained, run_experiment
from gazeauth.experiment.spec import ExperimentSpec
from gazeauth.state import ResultStore
from gazeauth.synth.corpus import generate_dataset
from gazeauth.synth.signature import PipelineNoise
from gazeauth.training.trainer import CHECKPOINT_NAME

pytestmark = pytest.mark.slow


def _desk_config():
    return Config(
        synth=SynthConfig(n_train_subjects=3, n_test_subjects=4, task_duration_s=25.0, folds=2, seed=5),
        train=TrainSettings(
            epoch_scale=0.02, users_per_batch=2, samples_per_user=2, growth=4,
            dilations=[1, 2, 4, 8, 1, 2, 4, 1], seed=5,
        ),
    )


@pytest.fixture(scope="module")
def corpus():
    return generate_dataset(_desk_config().synth, PipelineNoise.for_kind("New"))


def test_same_seed_same_result(tmp_path, corpus):
    spec = ExperimentSpec("S1@3", axis="B")
    first = run_experiment(spec, corpus, tmp_path / "a", config=_desk_config())
    second = run_experiment(spec, corpus, tmp_path / "b", config=_desk_config())

    assert first == second
    assert len(first.fold_eer) == 2
    assert 0.0 <= first.eer_mean <= 1.0
    assert (tmp_path / "a" / "S1_3" / "metrics.csv").exists()
    assert (tmp_path / "a" / "S1_3" / "run.log").exists()
    assert (tmp_path / "a" / "S1_3" / "scores" / "fold01.csv").exists()


def test_cells_sharing_a_training_key_reuse_the_model(tmp_path, corpus):
    config = _desk_config()
    store = ResultStore(tmp_path / "results")
    runner = ExperimentRunner(config, datasets={PipelineKind.NEW: corpus}, out_dir=tmp_path,
                              store=store, show_progress=False)
    specs = [ExperimentSpec("S1@2", axis="V"), ExperimentSpec("S2@2", scenario="S2", axis="V")]
    results = runner.run_grid(specs)

    assert [r.exp_id for r in results] == ["S1@2", "S2@2"]
    assert [r.exp_id for r in store.load_all()] == ["S1@2", "S2@2"]
    (key,) = runner._models
    model_dir = tmp_path / "models" / key
    assert (model_dir / CHECKPOINT_NAME).exists()

    trained = load_trained(model_dir)
    assert trained.model.config.input_channels == 4
    assert trained.stats.channels == 4


def test_impostor_claims_use_the_claimed_calibration(tmp_path, corpus):
    config = _desk_config()
    spec = ExperimentSpec("S3@2", scenario="S3", axis="V", experimental=True)
    result = run_experiment(spec, corpus, tmp_path, config=config)
    assert len(result.fold_frr) == 2


def test_optical_cells_ignore_the_scenario(tmp_path, corpus):
    config = _desk_config()
    runner = ExperimentRunner(config, datasets={PipelineKind.NEW: corpus}, out_dir=tmp_path, show_progress=False)
    s1 = runner.run(ExperimentSpec("S1@1", axis="O"))
    s2 = runner.run(ExperimentSpec("S2@1", scenario="S2", axis="O"))
    assert dataclasses.replace(s2, exp_id="S1@1", spec=s1.spec) == s1


def _study_config():
    """Desk-scale Config1: 40 train / 20 test subjects, 10 folds."""
    return Config(synth=SynthConfig(seed=11), train=TrainSettings(seed=11))


@pytest.fixture(scope="module")
def study():
    config = _study_config()
    corpus = generate_dataset(config.synth, PipelineNoise.for_kind("New"))
    return config, corpus


def _margin(worse, better):
    return (worse.eer_mean - better.eer_mean) - max(worse.eer_sd, better.eer_sd)


def test_axis_and_scenario_ordering_at_desk_scale(tmp_path, study):
    config, corpus = study
    runner = ExperimentRunner(config, datasets={PipelineKind.NEW: corpus}, out_dir=tmp_path, show_progress=False)
    s1_both = runner.run(ExperimentSpec("S1@3", axis="B"))
    s1_optical = runner.run(ExperimentSpec("S1@1", axis="O"))
    s1_visual = runner.run(ExperimentSpec("S1@2", axis="V"))
    s2_visual = runner.run(ExperimentSpec("S2@2", scenario="S2", axis="V"))
    s2_optical = runner.run(ExperimentSpec("S2@1", scenario="S2", axis="O"))

    assert len(s1_both.fold_eer) == config.eval.folds
    assert _margin(s1_optical, s1_both) > 0, (s1_optical.eer_mean, s1_optical.eer_sd, s1_both.eer_mean, s1_both.eer_sd)
    assert _margin(s2_visual, s1_visual) > 0, (s2_visual.eer_mean, s2_visual.eer_sd, s1_visual.eer_mean, s1_visual.eer_sd)
    assert s2_optical.fold_eer == s1_optical.fold_eer
