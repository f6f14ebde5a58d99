import numpy as np
import pytest

from gazeauth.biometrics.metrics import (
    FoldMetrics, aggregate_folds, eer, frr_at_far, read_fold_metrics, roc_curve, write_fold_metrics,
)
from gazeauth.biometrics.scoring import (
    EmbeddingContext, ScoreSet, centroid_embedding, cosine_similarity, load_scores, score_all, score_claims,
    segments_for_seconds, write_scores,
)
from gazeauth.core.exceptions import InsufficientDataError, ValidationError, ZeroNormError
from gazeauth.core.types import Axis, Recording, Task
from gazeauth.model.embedder import embed_windows, init_params
from gazeauth.preprocess.windows import WINDOW_SAMPLES, NormStats, assemble_channels, stack_windows


def _roc_oracle(genuine, impostor):
    genuine, impostor = np.asarray(genuine), np.asarray(impostor)
    thresholds = np.array(sorted(set(genuine) | set(impostor)) + [np.inf])
    far = (impostor[None, :] >= thresholds[:, None]).sum(axis=1) / len(impostor)
    frr = (genuine[None, :] < thresholds[:, None]).sum(axis=1) / len(genuine)
    return far, frr


def _eer_oracle(far, frr):
    for k in range(len(far)):
        if frr[k] >= far[k]:
            if k == 0 or frr[k] == far[k]:
                return far[k]
            before, after = frr[k - 1] - far[k - 1], frr[k] - far[k]
            t = before / (before - after)
            return far[k - 1] + t * (far[k] - far[k - 1])
    raise AssertionError("FRR never reaches FAR")


def _frr_at_far_oracle(far, frr, target):
    if not any(0 < f <= target for f in far):
        return frr[-1], True
    for k in range(len(far)):
        if far[k] <= target:
            if k == 0 or far[k] == target:
                return frr[k], False
            t = (far[k - 1] - target) / (far[k - 1] - far[k])
            return frr[k - 1] + t * (frr[k] - frr[k - 1]), False
    raise AssertionError("FAR never reaches the target")


def _random_score_set(rng):
    n_genuine, n_impostor = np.exp(rng.uniform(np.log(10), np.log(10_000), size=2)).astype(int)
    shift = rng.uniform(0.0, 0.5)
    genuine = np.round(rng.normal(0.3 + shift, 0.15, size=n_genuine), 3)
    impostor = np.round(rng.normal(0.3, 0.15, size=n_impostor), 3)
    return genuine, impostor


# Protocol arithmetic and templates

def test_twenty_seconds_is_four_segments():
    assert segments_for_seconds(20) == 4
    assert segments_for_seconds(5) == 1


@pytest.mark.parametrize("seconds", [0, 3, 7.5])
def test_partial_windows_are_rejected(seconds):
    with pytest.raises(ValidationError):
        segments_for_seconds(seconds)


def _constant_recording(n=4 * WINDOW_SAMPLES, value=0.0):
    gaze = np.full((n, 2), value)
    return Recording("S00001", "S00001-rs1", Task.RANDOM_SACCADE, 200, np.arange(n) / 72, gaze, gaze,
                     np.zeros((n, 2)), np.ones(n, dtype=bool))


def _drifting_recording(n=4 * WINDOW_SAMPLES):
    t = np.arange(n) / 72
    gaze = np.column_stack([8 * np.sin(t), 4 * np.cos(1.3 * t)])
    return Recording("S00001", "S00001-rs2", Task.RANDOM_SACCADE, 200, t, gaze, gaze - 1.0,
                     np.zeros((n, 2)), np.ones(n, dtype=bool))


@pytest.fixture
def context():
    return EmbeddingContext(axis=Axis.OPTICAL, filter_on=False, stats=NormStats(np.zeros(4), np.full(4, 50.0)))


def test_single_segment_centroid_is_the_embedding(small_embedder, context):
    model = init_params(small_embedder, seed=0)
    rec = _drifting_recording()
    windows = assemble_channels(rec, Axis.OPTICAL, [], False, context.stats)
    expected = embed_windows(model, stack_windows(windows[:1]))[0]

    np.testing.assert_array_equal(centroid_embedding(rec, model, 1, context), expected)


def test_identical_windows_share_their_centroid(small_embedder, context):
    model = init_params(small_embedder, seed=0)
    rec = _constant_recording()
    one = centroid_embedding(rec, model, 1, context)
    np.testing.assert_array_equal(centroid_embedding(rec, model, 4, context), one)


def test_centroid_needs_enough_windows(small_embedder, context):
    model = init_params(small_embedder, seed=0)
    with pytest.raises(InsufficientDataError, match="yields 4 windows, 5 required"):
        centroid_embedding(_constant_recording(), model, 5, context)


# Scores

def test_cosine_extremes():
    assert cosine_similarity(np.array([1.0, 2.0]), np.array([2.0, 4.0])) == pytest.approx(1.0)
    assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 3.0])) == 0.0
    with pytest.raises(ZeroNormError):
        cosine_similarity(np.zeros(3), np.ones(3))


def test_all_pairs_arithmetic(rng):
    enroll = {f"S{i:05d}": rng.normal(size=8) for i in range(30)}
    verify = {f"S{i:05d}": rng.normal(size=8) for i in range(10, 30)}
    scores = score_all(enroll, verify)

    assert len(scores) == 600
    assert int(scores.genuine.sum()) == 20
    assert scores.verify_subjects[0] == "S00010" and scores.enroll_subjects[0] == "S00000"


def test_identical_templates_score_one():
    v = np.array([0.3, -0.2, 0.9])
    scores = score_all({"A": v, "B": np.array([0.0, 1.0, 0.0])}, {"A": v})
    assert scores.similarity[0] == pytest.approx(1.0)
    assert scores.genuine.tolist() == [True, False]


def test_zero_template_is_rejected():
    with pytest.raises(ZeroNormError, match="verification centroid of A"):
        score_all({"A": np.ones(3)}, {"A": np.zeros(3)})


def test_claims_are_scored_against_the_claimed_template():
    enroll = {"alice": np.array([1.0, 0.0]), "bob": np.array([0.0, 1.0])}
    attempts = {
        ("alice", "alice"): np.array([1.0, 0.0]),
        ("bob", "alice"): np.array([1.0, 1.0]),
        ("bob", "bob"): np.array([0.0, 2.0]),
    }
    scores = score_claims(enroll, attempts)

    assert scores.verify_subjects == ("alice", "bob", "bob")
    assert scores.enroll_subjects == ("alice", "alice", "bob")
    np.testing.assert_allclose(scores.similarity, [1.0, np.sqrt(0.5), 1.0])
    assert scores.genuine.tolist() == [True, False, True]


def test_claim_without_enrollment():
    with pytest.raises(ValidationError, match="carol"):
        score_claims({"alice": np.ones(2)}, {("alice", "carol"): np.ones(2)})


def test_genuine_flags_must_match_subjects():
    with pytest.raises(ValidationError):
        ScoreSet(np.array([0.5]), np.array([True]), ("a",), ("b",))


def test_score_dump_round_trip(tmp_path, rng):
    scores = score_all({s: rng.normal(size=4) for s in "ABC"}, {s: rng.normal(size=4) for s in "AB"})
    loaded = load_scores(write_scores(scores, tmp_path / "scores.csv"))
    np.testing.assert_array_equal(loaded.similarity, scores.similarity)
    assert loaded.genuine.tolist() == scores.genuine.tolist()
    assert loaded.verify_subjects == scores.verify_subjects


# Error rates

def test_perfect_separation_has_zero_eer():
    assert eer(ScoreSet.from_scores([0.9, 0.8], [0.1, 0.2])) == 0.0


def test_inverted_scores_have_eer_one():
    assert eer(ScoreSet.from_scores([0.2], [0.8])) == 1.0


def test_interleaved_scores_cross_at_half():
    assert eer(ScoreSet.from_scores([0.6, 0.8], [0.5, 0.7])) == 0.5


def test_roc_matches_brute_force_sweep(rng):
    for _ in range(200):
        genuine, impostor = _random_score_set(rng)
        roc = roc_curve(ScoreSet.from_scores(genuine, impostor))
        far, frr = _roc_oracle(genuine, impostor)

        np.testing.assert_allclose(roc.far, far, rtol=0, atol=1e-12)
        np.testing.assert_allclose(roc.frr, frr, rtol=0, atol=1e-12)
        assert (roc.far[0], roc.frr[0], roc.far[-1], roc.frr[-1]) == (1.0, 0.0, 0.0, 1.0)


def test_eer_and_frr_at_far_match_brute_force(rng):
    for _ in range(200):
        genuine, impostor = _random_score_set(rng)
        scores = ScoreSet.from_scores(genuine, impostor)
        far, frr = _roc_oracle(genuine, impostor)
        target = float(np.exp(rng.uniform(np.log(1e-4), 0.0)))

        assert abs(eer(scores) - _eer_oracle(far, frr)) <= 1e-12
        value, unresolved = _frr_at_far_oracle(far, frr, target)
        result = frr_at_far(scores, target)
        assert result.unresolved_far is unresolved
        assert abs(result.frr - value) <= 1e-12

def test_eer_lies_between_the_bracketing_points(rng):
    genuine = rng.normal(0.6, 0.15, size=50)
    impostor = rng.normal(0.35, 0.15, size=400)
    value = eer(ScoreSet.from_scores(genuine, impostor))
    far, frr = _roc_oracle(list(genuine), list(impostor))
    i = int(np.argmax(frr - far >= 0))
    assert min(far[i], frr[i - 1]) - 1e-12 <= value <= max(far[i - 1], frr[i]) + 1e-12


def test_missing_class_is_rejected():
    with pytest.raises(InsufficientDataError, match="impostor"):
        eer(ScoreSet.from_scores([0.5, 0.6], []))
    with pytest.raises(InsufficientDataError, match="genuine"):
        frr_at_far(ScoreSet.from_scores([], [0.5]), 0.1)


def test_accept_everything_target():
    assert frr_at_far(ScoreSet.from_scores([0.6, 0.8], [0.5, 0.7]), 1.0) == (0.0, False)


def test_separated_scores_have_zero_frr():
    scores = ScoreSet.from_scores([0.9, 0.8, 0.85], [0.1, 0.2, 0.3, 0.4])
    assert frr_at_far(scores, 0.5).frr == 0.0
    assert frr_at_far(scores, 0.25) == (0.0, False)


def test_unreachable_target_is_flagged():
    scores = ScoreSet.from_scores([0.9, 0.6], [0.1, 0.2, 0.3, 0.7])
    result = frr_at_far(scores, 2e-5)
    assert result.unresolved_far is True
    assert result.frr == 1.0


def test_frr_is_interpolated_between_operating_points():
    scores = ScoreSet.from_scores([0.7, 0.9], [0.1, 0.7])
    # FAR 0.5, FRR 0 at t=0.7 and FAR 0, FRR 0.5 at t=0.9
    assert frr_at_far(scores, 0.25) == (pytest.approx(0.25), False)


@pytest.mark.parametrize("target", [0.0, -0.1, 1.5])
def test_far_target_range(target):
    with pytest.raises(ValidationError):
        frr_at_far(ScoreSet.from_scores([0.9], [0.1]), target)


def test_fold_aggregation():
    assert aggregate_folds([1.0, 2.0, 3.0]) == (2.0, 1.0)
    assert aggregate_folds([0.25] * 10) == (0.25, 0.0)
    with pytest.raises(ValidationError):
        aggregate_folds([0.1])


def test_fold_metrics_file(tmp_path):
    rows = [
        FoldMetrics.from_scores(0, ScoreSet.from_scores([0.6, 0.8], [0.5, 0.7]), 0.5),
        FoldMetrics(1, 0.1, 0.2, True),
    ]
    assert rows[0].eer == 0.5
    assert read_fold_metrics(write_fold_metrics(rows, tmp_path / "metrics.csv")) == rows
