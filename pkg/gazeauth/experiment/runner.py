"""
Experiment runner.

Coordinates calibration, preprocessing, training and fold evaluation of
experiment cells with progress tracking and per-cell logs.
"""
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..biometrics.metrics import FoldMetrics, aggregate_folds, write_fold_metrics
from ..biometrics.scoring import (
    EmbeddingContext, ScoreSet, centroid_embedding, score_all, score_claims, segments_for_seconds,
    write_scores,
)
from ..core.config import Config, get_config
from ..core.exceptions import GazeAuthError, InsufficientDataError, ValidationError
from ..core.types import Axis, Dataset, PipelineKind, Recording, Scenario
from ..dataset.folds import assign_folds
from ..logging import RunLogger, get_logger
from ..model.checkpoint import load_checkpoint
from ..model.embedder import Embedder, EmbedderConfig
from ..preprocess.windows import (
    NormStats, WindowTensor, apply_norm, fit_norm_stats, recording_windows, write_windows_csv,
)
from ..progress import ProgressTracker, Stage, create_reporter
from ..synth.corpus import generate_dataset
from ..synth.signature import PipelineNoise
from ..training.config import MsLossConfig, TrainConfig
from ..training.sampler import WindowPool
from ..training.trainer import CHECKPOINT_NAME, steps_per_epoch, train
from ..utils.paths import PathManager
from .scenarios import (
    CalibrationBank, CalibrationRef, enrollment_calibration, resolve_verification_calibration,
    training_depths,
)
from .spec import ExperimentResult, ExperimentSpec, check_unique_ids

logger = get_logger("experiment.runner")

NORM_NAME = "norm.json"
MODEL_INFO_NAME = "model.json"


@dataclass
class TrainedModel:
    """A trained embedder with the statistics its inputs were standardized by."""
    key: str
    model: Embedder
    stats: NormStats
    model_dir: Optional[Path] = None
    steps: int = 0


def save_norm_stats(stats: NormStats, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(stats.to_dict(), f, indent=2)
    return path


def load_trained(model_dir: Union[str, Path]) -> TrainedModel:
    """
    Load a checkpoint and its normalization statistics from a model directory.

    Raises:
        CheckpointError: Unreadable checkpoint
        ValidationError: Missing or malformed norm.json
    """
    model_dir = Path(model_dir)
    model = load_checkpoint(model_dir / CHECKPOINT_NAME)
    try:
        with open(model_dir / NORM_NAME, "r", encoding="utf-8") as f:
            stats = NormStats.from_dict(json.load(f))
    except (OSError, ValueError, KeyError) as e:
        raise ValidationError(f"cannot read {model_dir / NORM_NAME}: {e}")
    return TrainedModel(key=model_dir.name, model=model, stats=stats, model_dir=model_dir)


def _task_pair(dataset: Dataset, subject_id: str) -> Tuple[Recording, Recording]:
    recs = dataset.subject(subject_id).task_recordings
    if len(recs) < 2:
        raise InsufficientDataError(
            f"subject {subject_id} has {len(recs)} task recording(s); enrollment and verification need 2",
            suggestions=["Generate the corpus with synth.task_recordings >= 2"],
        )
    return recs[0], recs[1]


class ExperimentRunner:
    """
    Runs experiment cells end to end.

    Stages:
    1. Fit calibration models for every subject
    2. Build and standardize training windows
    3. Train the embedder (reused across cells sharing a training key)
    4. Score enrollment/verification templates per fold
    5. Aggregate fold metrics and store the result

    Datasets are generated on demand from the synth configuration unless
    supplied per pipeline.
    """

    def __init__(
        self,
        config: Optional[Config] = None,
        datasets: Optional[Mapping[PipelineKind, Dataset]] = None,
        out_dir: Optional[Path] = None,
        store=None,
        show_progress: bool = True,
    ):
        """
        Args:
            config: Configuration (uses global if None)
            datasets: Pre-built corpora keyed by pipeline
            out_dir: Artifact root (config.output_dir if None)
            store: ResultStore persisting finished results
            show_progress: Render progress bars
        """
        self.config = config or get_config()
        self.out_dir = Path(out_dir) if out_dir is not None else Path(self.config.output_dir)
        self.datasets: Dict[PipelineKind, Dataset] = {PipelineKind(k): v for k, v in (datasets or {}).items()}
        self.store = store
        self.show_progress = show_progress
        self._banks: Dict[PipelineKind, CalibrationBank] = {}
        self._models: Dict[str, TrainedModel] = {}

    def dataset_for(self, pipeline: Union[PipelineKind, str]) -> Dataset:
        """Corpus for a pipeline, generated from the synth configuration if not supplied."""
        pipeline = PipelineKind(pipeline)
        if pipeline not in self.datasets:
            logger.info(f"No {pipeline.value} corpus supplied, generating one (seed {self.config.synth.seed})")
            self.datasets[pipeline] = generate_dataset(self.config.synth, PipelineNoise.for_kind(pipeline))
        dataset = self.datasets[pipeline]
        if dataset.n_folds == 0:
            dataset = assign_folds(dataset, k=self.config.eval.folds, seed=self.config.synth.seed)
            self.datasets[pipeline] = dataset
        return dataset

    def calibrations(self, pipeline: Union[PipelineKind, str]) -> CalibrationBank:
        pipeline = PipelineKind(pipeline)
        if pipeline not in self._banks:
            self._banks[pipeline] = CalibrationBank.fit(self.dataset_for(pipeline))
        return self._banks[pipeline]

    def run(self, spec: ExperimentSpec) -> ExperimentResult:
        """
        Run one cell.

        Raises:
            GazeAuthError: Any failure; unexpected exceptions are wrapped
        """
        run_dir = self.out_dir / PathManager.safe_filename(spec.exp_id)
        tracker = ProgressTracker(label=spec.exp_id)
        logger.info(f"Running {spec.describe()}")

        with RunLogger(spec.exp_id, run_dir) as run_log:
            with create_reporter(tracker, self.show_progress) as reporter:
                try:
                    return self._execute(spec, run_dir, tracker, reporter, run_log)
                except GazeAuthError as e:
                    logger.error(f"Experiment {spec.exp_id} failed: {e.message}")
                    raise
                except Exception as e:
                    logger.error(f"Unexpected error in {spec.exp_id}: {e}", exc_info=True)
                    raise GazeAuthError(f"Experiment {spec.exp_id} failed: {e}") from e

    def run_grid(
        self,
        specs: Sequence[ExperimentSpec],
        on_result: Optional[Callable[[ExperimentResult], None]] = None,
    ) -> List[ExperimentResult]:
        """Run cells in order; trained models are shared between them."""
        check_unique_ids(list(specs))
        results = []
        for i, spec in enumerate(specs, start=1):
            logger.info(f"Cell {i}/{len(specs)}: {spec.exp_id}")
            result = self.run(spec)
            results.append(result)
            if on_result:
                on_result(result)
        return results

    def _execute(self, spec: ExperimentSpec, run_dir: Path, tracker, reporter, run_log: RunLogger) -> ExperimentResult:
        start = time.time()
        dataset = self.dataset_for(spec.pipeline)

        reporter.start_stage(Stage.CALIBRATE, "Fitting calibrations")
        bank = self.calibrations(spec.pipeline)
        reporter.complete_stage()
        run_log.info(f"Calibration models: {len(bank)}")

        trained = self.train_model(spec, reporter=reporter, run_log=run_log)

        folds = self.evaluate(spec, trained, run_dir, tracker=tracker, reporter=reporter, run_log=run_log)

        reporter.start_stage(Stage.REPORT, "Aggregating folds")
        eer_mean, eer_sd = aggregate_folds([m.eer for m in folds])
        frr_mean, frr_sd = aggregate_folds([m.frr_at_far for m in folds])
        write_fold_metrics(folds, run_dir / "metrics.csv")
        result = ExperimentResult(
            exp_id=spec.exp_id,
            eer_mean=eer_mean,
            eer_sd=eer_sd,
            frr_mean=frr_mean,
            frr_sd=frr_sd,
            unresolved_far=any(m.unresolved_far for m in folds),
            fold_eer=[m.eer for m in folds],
            fold_frr=[m.frr_at_far for m in folds],
            spec=spec,
            runtime_s=time.time() - start,
        )
        if self.store is not None:
            self.store.save(result, run_dir=run_dir, seed=self.config.synth.seed)
        reporter.complete_stage()
        reporter.print_summary()

        run_log.info(
            f"EER {100 * eer_mean:.2f} ({100 * eer_sd:.2f}) %, FRR {100 * frr_mean:.2f} ({100 * frr_sd:.2f}) %"
            + (" [FAR target unresolved]" if result.unresolved_far else ""),
            duration_ms=int(1000 * result.runtime_s),
        )
        return result

    def training_windows(self, spec: ExperimentSpec) -> List[WindowTensor]:
        """Clamped, unstandardized windows of every training subject's task recordings."""
        dataset = self.dataset_for(spec.pipeline)
        bank = self.calibrations(spec.pipeline) if spec.axis != Axis.OPTICAL else None
        windows: List[WindowTensor] = []
        for sid in dataset.train_subject_ids:
            models = [bank[CalibrationRef(sid, d)] for d in training_depths(spec.calib_training)] if bank else []
            for rec in dataset.subject(sid).task_recordings:
                windows.extend(recording_windows(rec, spec.axis, models, spec.filter_on))
        return windows

    def train_model(
        self,
        spec: ExperimentSpec,
        reporter=None,
        run_log: Optional[RunLogger] = None,
        dump_windows: Optional[Path] = None,
    ) -> TrainedModel:
        """
        Embedder for a cell, trained once per training key.

        Args:
            spec: Experiment cell
            reporter: Progress reporter (silent if None)
            run_log: Per-cell logger
            dump_windows: If set, the standardized training windows are written here as CSV

        Raises:
            InsufficientDataError: No training windows
        """
        if reporter is None:
            reporter = create_reporter(ProgressTracker(spec.exp_id), show_progress=False)
        key = spec.training_key
        cached = self._models.get(key)
        if cached is not None and dump_windows is None:
            reporter.start_stage(Stage.PREPROCESS, f"Reusing model {key}")
            reporter.complete_stage()
            reporter.start_stage(Stage.TRAIN, f"Reusing model {key}")
            reporter.complete_stage()
            if run_log:
                run_log.info(f"Reusing trained model {key}")
            return cached

        reporter.start_stage(Stage.PREPROCESS, "Building training windows")
        raw = self.training_windows(spec)
        if not raw:
            raise InsufficientDataError(f"no training windows for {spec.exp_id}")
        stats = fit_norm_stats(raw)
        windows = [apply_norm(w, stats) for w in raw]
        if dump_windows is not None:
            write_windows_csv(windows, dump_windows)
        pool = WindowPool.from_windows(windows)
        reporter.complete_stage()
        if run_log:
            run_log.info(f"Training pool: {len(pool)} windows, {len(pool.subject_ids)} subjects, "
                         f"{stats.channels} channels")

        settings = self.config.train
        embedder_cfg = EmbedderConfig(
            input_channels=stats.channels,
            growth=settings.growth,
            kernel_size=settings.kernel_size,
            dilations=list(settings.dilations),
            activation=settings.activation,
        )
        train_cfg = TrainConfig.for_regime(spec.regime, settings)
        eligible = sum(len(w) for w in pool.by_subject.values() if len(w) >= train_cfg.samples_per_user)
        total_steps = train_cfg.epochs * steps_per_epoch(eligible, train_cfg.minibatch)

        model_dir = self.out_dir / "models" / key
        reporter.start_stage(Stage.TRAIN, f"Training {key}", total=total_steps)
        result = train(
            pool,
            embedder_cfg,
            train_cfg,
            MsLossConfig(),
            out_dir=model_dir,
            on_step=lambda step, total, loss: reporter.update(completed=step),
        )
        save_norm_stats(stats, model_dir / NORM_NAME)
        with open(model_dir / MODEL_INFO_NAME, "w", encoding="utf-8") as f:
            json.dump({
                "training_key": key,
                "embedder": embedder_cfg.to_dict(),
                "train": train_cfg.to_dict(),
                "eligible_subjects": result.eligible_subjects,
                "steps_per_epoch": result.steps_per_epoch,
            }, f, indent=2)
        reporter.complete_stage()

        trained = TrainedModel(key=key, model=result.model, stats=stats, model_dir=model_dir,
                               steps=len(result.history))
        self._models[key] = trained
        return trained

    def evaluate(
        self,
        spec: ExperimentSpec,
        trained: TrainedModel,
        run_dir: Optional[Path] = None,
        tracker: Optional[ProgressTracker] = None,
        reporter=None,
        run_log: Optional[RunLogger] = None,
    ) -> List[FoldMetrics]:
        """
        Per-fold metrics of a trained model under the cell's scenario.

        Enrollment uses each test subject's first task recording, verification
        the second.
        """
        dataset = self.dataset_for(spec.pipeline)
        tracker = tracker or ProgressTracker(spec.exp_id)
        if reporter is None:
            reporter = create_reporter(tracker, show_progress=False)

        context = EmbeddingContext(axis=spec.axis, filter_on=spec.filter_on, stats=trained.stats)
        n_segments = segments_for_seconds(spec.verification_seconds)
        far_target = self.config.eval.far_target

        tracker.set_folds(dataset.n_folds)
        reporter.start_stage(Stage.EVALUATE, "Scoring folds", total=100)
        folds = []
        for fold in range(dataset.n_folds):
            members = dataset.fold_members(fold)
            scores = self._score_fold(spec, dataset, members, trained.model, context, n_segments)
            metrics = FoldMetrics.from_scores(fold, scores, far_target)
            folds.append(metrics)
            if run_dir is not None:
                write_scores(scores, Path(run_dir) / "scores" / f"fold{fold:02d}.csv")
            if run_log:
                run_log.debug(
                    f"fold {fold}: {len(members)} subjects, {int(scores.genuine.sum())} genuine, "
                    f"EER {metrics.eer:.4f}", fold=fold,
                )
            tracker.complete_fold(fold)
        reporter.complete_stage()
        return folds

    def _score_fold(
        self,
        spec: ExperimentSpec,
        dataset: Dataset,
        members: Sequence[str],
        model: Embedder,
        context: EmbeddingContext,
        n_segments: int,
    ) -> ScoreSet:
        if len(members) < 2:
            raise InsufficientDataError(f"fold has {len(members)} test subject(s); need 2 for impostor scores")
        bank = self.calibrations(spec.pipeline) if spec.axis != Axis.OPTICAL else None
        templates: Dict[Tuple[str, Optional[CalibrationRef]], object] = {}

        def template(rec: Recording, ref: CalibrationRef):
            # the optical axis never uses a calibration, so all refs collapse
            ref = ref if bank is not None else None
            cache_key = (rec.recording_id, ref)
            if cache_key not in templates:
                calibration = bank[ref] if ref is not None else None
                templates[cache_key] = centroid_embedding(rec, model, n_segments, context, calibration)
            return templates[cache_key]

        pairs = {sid: _task_pair(dataset, sid) for sid in members}
        enroll = {sid: template(pairs[sid][0], enrollment_calibration(sid)) for sid in members}

        if spec.scenario == Scenario.S3:
            verify_by_claim = {
                (actual, claimed): template(pairs[actual][1],
                                            resolve_verification_calibration(spec.scenario, claimed, actual))
                for actual in members for claimed in members
            }
            return score_claims(enroll, verify_by_claim)

        verify = {
            sid: template(pairs[sid][1], resolve_verification_calibration(spec.scenario, sid, sid))
            for sid in members
        }
        return score_all(enroll, verify)


def run_experiment(
    spec: ExperimentSpec,
    dataset: Dataset,
    out_dir: Union[str, Path],
    config: Optional[Config] = None,
    show_progress: bool = False,
) -> ExperimentResult:
    """
    Train and evaluate one cell on a given corpus.

    The corpus must have been generated with the cell's pipeline noise.
    """
    runner = ExperimentRunner(
        config=config,
        datasets={spec.pipeline: dataset},
        out_dir=Path(out_dir),
        show_progress=show_progress,
    )
    return runner.run(spec)
