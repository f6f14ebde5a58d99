import dataclasses

import numpy as np
import pytest

from gazeauth.core.config import Config, SynthConfig, set_config
from gazeauth.core.types import Task
from gazeauth.model.embedder import EmbedderConfig
from gazeauth.synth.corpus import generate_dataset
from gazeauth.synth.recording import generate_recording
from gazeauth.synth.signature import PipelineNoise, generate_subject_signature


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """Every test starts from default settings and a clean environment."""
    for var in ("GAZEAUTH_LOG_LEVEL", "GAZEAUTH_THREADS", "GAZEAUTH_OUTPUT_DIR"):
        monkeypatch.delenv(var, raising=False)
    set_config(Config())
    yield
    set_config(Config())


@pytest.fixture
def tiny_synth():
    return SynthConfig(
        n_train_subjects=3,
        n_test_subjects=2,
        task_duration_s=25.0,
        task_recordings=2,
        folds=2,
        seed=7,
    )


@pytest.fixture
def tiny_dataset(tiny_synth):
    return generate_dataset(tiny_synth, PipelineNoise.for_kind("New"))


@pytest.fixture
def still_signature():
    """A subject whose fixations do not drift."""
    return dataclasses.replace(generate_subject_signature(3, 4), drift_deg=0.0)


@pytest.fixture
def noiseless_calibration(still_signature, tiny_synth):
    def make(depth_cm=200):
        return generate_recording(
            still_signature, Task.CALIBRATION, depth_cm, PipelineNoise.noiseless(), tiny_synth, seed=11,
        )
    return make


@pytest.fixture
def small_embedder():
    return EmbedderConfig(input_channels=4, growth=4, dilations=[1, 2, 4, 8, 1, 2, 4, 1], input_length=360)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
