"""
Command-line interface for GazeAuth.

Provides commands for corpus synthesis, training, evaluation, experiment
cells and grids, reports and signal-quality measurement.

Exit codes: 0 success, 2 validation error, 3 runtime or numeric error.
"""
import sys
from functools import wraps
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .core.config import Config, get_config, load_config, set_config
from .core.exceptions import GazeAuthError, ValidationError
from .core.types import Axis, CalibTraining, FilterMode, PipelineKind, Regime, Scenario
from .logging import get_logger, setup_logging

logger = get_logger("cli")

AXES = [a.value for a in Axis]
SCENARIOS = [s.value for s in Scenario]
CALIBS = [c.value for c in CalibTraining]
PIPELINES = [p.value for p in PipelineKind]
REGIMES = [r.value for r in Regime]
FILTERS = [f.value for f in FilterMode]


def _fail(e: GazeAuthError):
    logger.error(e.message)
    if e.suggestions:
        click.echo("\nSuggestions:", err=True)
        for i, tip in enumerate(e.suggestions, 1):
            click.echo(f"  {i}. {tip}", err=True)
    sys.exit(e.exit_code)


def handle_errors(func):
    """Map GazeAuth errors to exit codes 2/3 and print their suggestions."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GazeAuthError as e:
            _fail(e)
        except KeyboardInterrupt:
            logger.info("Interrupted by user")
            sys.exit(130)
        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            sys.exit(3)
    return wrapper


def _apply_common(config: Config, seed: Optional[int] = None, threads: Optional[int] = None,
                  output_dir: Optional[Path] = None):
    if seed is not None:
        config.synth.seed = seed
        config.train.seed = seed
    if threads is not None:
        config.train.threads = threads
    if output_dir is not None:
        config.output_dir = Path(output_dir)
        config.logs_dir = config.output_dir / "logs"


def _load_corpus(data: Optional[Path], pipeline: str):
    """A corpus from disk, or None so the runner generates one."""
    if data is None:
        return {}
    from .dataset.storage import load_dataset
    return {PipelineKind(pipeline): load_dataset(data)}


def _spec_from_options(exp_id, scenario, calib, pipeline, axis, regime, filter_mode, seconds, experimental):
    from .experiment.spec import ExperimentSpec
    return ExperimentSpec(
        exp_id=exp_id or f"{scenario}@1",
        scenario=scenario,
        calib_training=calib,
        pipeline=pipeline,
        axis=axis,
        regime=regime,
        filter=filter_mode,
        verification_seconds=seconds,
        experimental=experimental,
    )


def cell_options(func):
    """Factor options shared by train, eval and exp."""
    options = [
        click.option("--scenario", type=click.Choice(SCENARIOS), default="S1", show_default=True),
        click.option("--calib", type=click.Choice(CALIBS), default="All", show_default=True,
                     help="Calibrations used for training-time visual estimates"),
        click.option("--pipeline", type=click.Choice(PIPELINES), default="New", show_default=True),
        click.option("--axis", type=click.Choice(AXES), default="B", show_default=True),
        click.option("--regime", type=click.Choice(REGIMES), default="Config1", show_default=True),
        click.option("--filter", "filter_mode", type=click.Choice(FILTERS), default="Off", show_default=True),
        click.option("--seconds", type=int, default=None, help="Verification duration (default from [eval])"),
        click.option("--experimental-s3", "experimental", is_flag=True, help="Allow the S3 pilot scenario"),
        click.option("--exp-id", default=None, help="Experiment id (default '<scenario>@1')"),
        click.option("--data", type=click.Path(exists=True, file_okay=False, path_type=Path),
                     help="Corpus directory written by 'gen' (generated in memory if omitted)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="TOML configuration file")
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path), help="Artifact root")
@click.option("--threads", type=int, default=None, help="Torch intra-op threads")
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.option("--no-progress", is_flag=True, help="Disable progress bars")
@click.pass_context
def cli(ctx, config_path, output_dir, threads, debug, no_progress):
    """GazeAuth - eye-movement authentication lab"""
    ctx.ensure_object(dict)
    try:
        config = load_config(config_path)
    except GazeAuthError as e:
        _fail(e)
    _apply_common(config, threads=threads, output_dir=output_dir)
    set_config(config)
    ctx.obj["show_progress"] = not no_progress

    setup_logging(level="DEBUG" if debug else config.log.level)


@cli.command()
@click.option("--seed", type=int, required=True, help="Master seed")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True,
              help="Dataset directory")
@click.option("--pipeline", type=click.Choice(PIPELINES), default="New", show_default=True)
@click.option("--train-subjects", type=int, default=None)
@click.option("--test-subjects", type=int, default=None)
@click.option("--task-recordings", type=int, default=None)
@click.option("--folds", type=int, default=None)
@click.option("--workers", type=int, default=None)
@handle_errors
def gen(seed, out, pipeline, train_subjects, test_subjects, task_recordings, folds, workers):
    """Synthesize a gaze corpus and its ground-truth signatures."""
    from .dataset.storage import save_dataset
    from .synth import generate_dataset, generate_signatures, write_signatures
    from .synth.signature import PipelineNoise

    config = get_config()
    _apply_common(config, seed=seed)
    synth = config.synth
    for name, value in (("n_train_subjects", train_subjects), ("n_test_subjects", test_subjects),
                        ("task_recordings", task_recordings), ("folds", folds), ("workers", workers)):
        if value is not None:
            setattr(synth, name, value)

    dataset = generate_dataset(synth, PipelineNoise.for_kind(pipeline))
    save_dataset(dataset, out)
    write_signatures(generate_signatures(synth), Path(out) / "signatures.csv")
    click.echo(f"Dataset: {out} ({len(dataset.subjects)} subjects, {dataset.n_folds} folds)")


@cli.command("train")
@cell_options
@click.option("--seed", type=int, default=None, help="Seed (config default if omitted)")
@click.option("--dump-windows", type=click.Path(dir_okay=False, path_type=Path),
              help="Write the standardized training windows as CSV")
@click.pass_context
@handle_errors
def train_cmd(ctx, scenario, calib, pipeline, axis, regime, filter_mode, seconds, experimental, exp_id, data,
              seed, dump_windows):
    """Train one embedder and write its checkpoint."""
    from .experiment.runner import ExperimentRunner

    config = get_config()
    _apply_common(config, seed=seed)
    spec = _spec_from_options(exp_id, scenario, calib, pipeline, axis, regime, filter_mode,
                              seconds or config.eval.verification_seconds, experimental)
    runner = ExperimentRunner(config, datasets=_load_corpus(data, pipeline),
                              show_progress=ctx.obj["show_progress"])
    trained = runner.train_model(spec, dump_windows=dump_windows)
    click.echo(f"Checkpoint: {trained.model_dir}")


@cli.command("eval")
@cell_options
@click.option("--model", "model_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True,
              help="Model directory written by 'train'")
@click.option("--seed", type=int, default=None)
@click.pass_context
@handle_errors
def eval_cmd(ctx, scenario, calib, pipeline, axis, regime, filter_mode, seconds, experimental, exp_id, data,
             model_dir, seed):
    """Per-fold metrics of a trained checkpoint under one scenario."""
    from .biometrics.metrics import aggregate_folds, write_fold_metrics
    from .experiment.runner import ExperimentRunner, load_trained
    from .utils.paths import PathManager

    config = get_config()
    _apply_common(config, seed=seed)
    spec = _spec_from_options(exp_id, scenario, calib, pipeline, axis, regime, filter_mode,
                              seconds or config.eval.verification_seconds, experimental)
    trained = load_trained(model_dir)
    expected = 8 if spec.axis == Axis.BOTH else 4
    if trained.model.config.input_channels != expected:
        raise ValidationError(
            f"checkpoint expects {trained.model.config.input_channels} channels, axis {spec.axis.value} gives {expected}"
        )

    run_dir = config.output_dir / PathManager.safe_filename(spec.exp_id)
    runner = ExperimentRunner(config, datasets=_load_corpus(data, pipeline),
                              show_progress=ctx.obj["show_progress"])
    folds = runner.evaluate(spec, trained, run_dir=run_dir)
    path = write_fold_metrics(folds, run_dir / "metrics.csv")
    eer_mean, eer_sd = aggregate_folds([m.eer for m in folds])
    frr_mean, frr_sd = aggregate_folds([m.frr_at_far for m in folds])
    click.echo(f"EER {100 * eer_mean:.2f} ({100 * eer_sd:.2f}) %  FRR {100 * frr_mean:.2f} ({100 * frr_sd:.2f}) %")
    click.echo(f"Metrics: {path}")


@cli.command()
@cell_options
@click.option("--seed", type=int, required=True, help="Master seed")
@click.pass_context
@handle_errors
def exp(ctx, scenario, calib, pipeline, axis, regime, filter_mode, seconds, experimental, exp_id, data, seed):
    """Run one experiment cell and store its result."""
    from .experiment.report import render_report
    from .experiment.runner import ExperimentRunner
    from .state import ResultStore

    config = get_config()
    _apply_common(config, seed=seed)
    spec = _spec_from_options(exp_id, scenario, calib, pipeline, axis, regime, filter_mode,
                              seconds or config.eval.verification_seconds, experimental)
    runner = ExperimentRunner(config, datasets=_load_corpus(data, pipeline),
                              store=ResultStore(config.output_dir / "results"),
                              show_progress=ctx.obj["show_progress"])
    result = runner.run(spec)
    click.echo(render_report([result], "markdown"))


@cli.command()
@click.option("--reference", "reference_layout", is_flag=True, help="Run the 20-cells-per-scenario reference layout")
@click.option("--experimental-s3", "experimental", is_flag=True, help="Include S3 pilot cells")
@click.option("--only", multiple=True, help="Run only these experiment ids")
@click.option("--seed", type=int, default=None)
@click.option("--data-new", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--data-old", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.pass_context
@handle_errors
def grid(ctx, reference_layout, experimental, only, seed, data_new, data_old):
    """Run a factor grid ([grid] section or the reference layout)."""
    from .dataset.storage import load_dataset
    from .experiment.report import render_report
    from .experiment.runner import ExperimentRunner
    from .experiment.spec import expand_grid, reference_grid
    from .state import ResultStore

    config = get_config()
    _apply_common(config, seed=seed)
    seconds = config.eval.verification_seconds
    if experimental:
        config.grid.experimental_s3 = True
    specs = (reference_grid(experimental=config.grid.experimental_s3, verification_seconds=seconds)
             if reference_layout else expand_grid(config.grid, verification_seconds=seconds))
    if only:
        unknown = set(only) - {s.exp_id for s in specs}
        if unknown:
            raise ValidationError(f"unknown experiment id(s): {', '.join(sorted(unknown))}")
        specs = [s for s in specs if s.exp_id in set(only)]

    datasets = {}
    if data_new:
        datasets[PipelineKind.NEW] = load_dataset(data_new)
    if data_old:
        datasets[PipelineKind.OLD] = load_dataset(data_old)
    runner = ExperimentRunner(config, datasets=datasets, store=ResultStore(config.output_dir / "results"),
                              show_progress=ctx.obj["show_progress"])
    results = runner.run_grid(specs)
    click.echo(render_report(results, "markdown"))


@cli.command()
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv"]), default="markdown", show_default=True)
@click.option("--compare", type=click.Choice(["scenario", "calibration", "pipeline"]),
              help="Render a change table instead of the result table")
@click.option("--results", "results_dir", type=click.Path(file_okay=False, path_type=Path),
              help="Result store directory (default <output-dir>/results)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write to a file instead of stdout")
@click.option("--drop", multiple=True, help="Delete these stored results before rendering")
@handle_errors
def report(fmt, compare, results_dir, out, drop):
    """Render stored results, optionally dropping some first."""
    from .experiment.report import render_comparison, render_report
    from .experiment.spec import reference_comparisons
    from .state import ResultStore

    config = get_config()
    store = ResultStore(results_dir or config.output_dir / "results")
    for exp_id in drop:
        if not store.delete(exp_id):
            raise ValidationError(f"no stored result '{exp_id}' to drop")
        logger.info(f"Dropped stored result {exp_id}")
    results = store.load_all()
    if compare:
        text = render_comparison(results, reference_comparisons(compare)[compare], fmt)
    else:
        text = render_report(results, fmt)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"Report: {out}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option("--data", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Quality CSV (default <data>/quality.csv)")
@click.option("--monocular", is_flag=True, help="Aggregate per eye instead of cyclopean gaze")
@click.option("--depth", type=click.Choice(["200", "75"]), default="200", show_default=True,
              help="Calibration depth applied to every recording")
@handle_errors
def quality(data, out, monocular, depth):
    """Spatial accuracy and precision of every recording."""
    from .calibration.quality import measure_dataset, summarize, write_quality_report
    from .dataset.storage import load_dataset
    from .experiment.scenarios import CalibrationBank, CalibrationRef

    dataset = load_dataset(data)
    bank = CalibrationBank.fit(dataset)
    models = {s.subject_id: bank[CalibrationRef(s.subject_id, int(depth))] for s in dataset.subjects}
    rows = measure_dataset(dataset, models, include_optical=True, binocular=not monocular)
    path = write_quality_report(rows, out or Path(data) / "quality.csv")
    for axis in ("O", "V"):
        summary = summarize(rows, axis)
        if summary:
            click.echo(f"{axis}: accuracy {summary['accuracy_deg']:.2f} deg, precision {summary['precision_deg']:.2f} deg")
    click.echo(f"Quality report: {path}")


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
