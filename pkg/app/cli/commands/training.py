# app/cli/commands/training.py
from pathlib import Path
from typing import Optional

import typer
from loguru import logger

from app.cli.commands.common import RunContext, corpus_schema, dispatch, load_corpus, parse_list, require_input
from app.const.enum import CommandName, Metric, SamplingVariant, TrainingArm
from app.core.benchmark import make_blobs_benchmark
from app.core.config import DEFAULT_NOISY_MULTIPLIER
from app.core.errors import InvalidParameterError
from app.core.training import (
    CorrelationReport, arm_setup, clean_data, clean_sample, correlation_experiment, evaluate, train as run_training,
)
from app.core.utils import write_csv
from app.dto.rows import CorrelationRow, EpochTraceRow
from app.middleware.logging import command_logging
from app.models.corpus import ParallelCorpus
from app.models.estimation import NoiseEstimate
from app.models.manifest import ExperimentManifest
from app.models.training import LinearSoftmaxModel, TrainConfig
from app.storage.corpus_files import load_tsv_corpus
from app.storage.formats import (
    load_model, load_model_labels, load_noise_matrix, save_estimate, save_model, write_json, write_rows,
)

MODEL_FILE = "model.json"
TRACE_FILE = "trace.csv"
ESTIMATE_FILE = "estimate.json"
METRICS_FILE = "metrics.json"
CORRELATION_FILE = "correlation.csv"
CORRELATION_REPORT_FILE = "correlation.json"


def correlation_table(report: CorrelationReport) -> list:
    """Grid rows followed by a `pearson` summary row (empty value when undefined)."""
    rows = [row.values() for row in report.rows]
    rows.append(["pearson", report.pearson, None, None])
    return rows


def _training_params(epochs: int, learning_rate: float, batch_size: int, noisy_multiplier: float) -> dict:
    return {
        "epochs": epochs,
        "learning_rate": learning_rate,
        "batch_size": batch_size,
        "noisy_multiplier": noisy_multiplier,
    }


def train_config(manifest: ExperimentManifest) -> TrainConfig:
    return TrainConfig(
        epochs=manifest.param("epochs", 20),
        learning_rate=manifest.param("learning_rate", 0.1),
        batch_size=manifest.param("batch_size", 32),
        noisy_multiplier=manifest.param("noisy_multiplier", DEFAULT_NOISY_MULTIPLIER),
        seed=manifest.seed,
    )


def load_aligned(manifest: ExperimentManifest, role: str, label_names) -> ParallelCorpus:
    """Loads a held-out corpus with the training tag inventory, so class indices line up."""
    path = require_input(manifest, role)
    if label_names is None or path.suffix.lower() == ".csv":
        return load_corpus(manifest, role)
    schema = corpus_schema(manifest).model_copy(update={"label_inventory": list(label_names)})
    return load_tsv_corpus(path, schema)


def _non_entity_index(label_names, tag: Optional[str]) -> Optional[int]:
    if tag is None:
        return None
    if tag not in label_names:
        raise InvalidParameterError(f"Unknown non-entity tag '{tag}'. Available: {', '.join(label_names)}.")
    return list(label_names).index(tag)


@command_logging(CommandName.TRAIN.value)
def train(
    ctx: typer.Context,
    corpus: Optional[Path] = typer.Option(None, "--corpus", help="Training corpus TSV with feature columns."),
    dev: Optional[Path] = typer.Option(None, "--dev", help="Development corpus for epoch selection."),
    clean_per_class: Optional[int] = typer.Option(None, "--clean-per-class", min=1, help="Clean instances per class."),
    arm: TrainingArm = typer.Option(TrainingArm.NOISE_HANDLED, "--arm"),
    matrix: Optional[Path] = typer.Option(None, "--matrix", help="Fixed noise layer instead of the estimate."),
    epochs: int = typer.Option(20, "--epochs", min=1),
    learning_rate: float = typer.Option(0.1, "--learning-rate"),
    batch_size: int = typer.Option(32, "--batch-size", min=1),
    noisy_multiplier: float = typer.Option(DEFAULT_NOISY_MULTIPLIER, "--noisy-multiplier"),
    noisy_columns: int = typer.Option(1, "--noisy-columns", min=1),
    label_set_names: Optional[str] = typer.Option(None, "--label-set-names"),
    label_set: Optional[str] = typer.Option(None, "--label-set"),
):
    """Train the linear softmax model on a clean sample plus the noisy pool."""
    def build(run: RunContext) -> ExperimentManifest:
        inputs = {"corpus": str(corpus)} if corpus else {}
        if dev:
            inputs["dev"] = str(dev)
        if matrix:
            inputs["matrix"] = str(matrix)
        params = _training_params(epochs, learning_rate, batch_size, noisy_multiplier)
        params.update({
            "clean_per_class": clean_per_class,
            "arm": arm.value,
            "noisy_columns": noisy_columns,
            "label_set_names": parse_list(label_set_names, str, "label set"),
            "label_set": label_set,
        })
        return ExperimentManifest(
            subcommand=CommandName.TRAIN, inputs=inputs, params=params, seed=run.seed, out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        n_i = manifest.param("clean_per_class")
        if n_i is None:
            raise InvalidParameterError("--clean-per-class is required.")
        data = load_corpus(manifest, "corpus")
        config = train_config(manifest)
        chosen = TrainingArm(manifest.param("arm", TrainingArm.NOISE_HANDLED.value))
        fixed = load_noise_matrix(Path(manifest.input_path("matrix"))) if manifest.input_path("matrix") else None

        idx = clean_sample(data, [int(n_i)] * data.k, config.seed)
        setup = arm_setup(data, idx, chosen, manifest.param("label_set"), fixed)
        if isinstance(setup.layer, NoiseEstimate):
            save_estimate(setup.layer, out_dir / ESTIMATE_FILE)
        dev_data = None
        if manifest.input_path("dev"):
            dev_data = clean_data(load_aligned(manifest, "dev", data.label_names))

        result = run_training(LinearSoftmaxModel.zeros(data.k, data.d), setup.clean, setup.noisy, setup.layer, config, dev_data)
        save_model(result.model, out_dir / MODEL_FILE, data.label_names)
        write_rows(out_dir / TRACE_FILE, result.trace, EpochTraceRow)
        logger.info(f"Arm {chosen.value}: model from epoch {result.best_epoch} written to {out_dir / MODEL_FILE}")

    dispatch(ctx, CommandName.TRAIN, build, execute)


@command_logging(CommandName.EVAL.value)
def eval_model(
    ctx: typer.Context,
    model: Optional[Path] = typer.Option(None, "--model", help="Model JSON written by train."),
    test: Optional[Path] = typer.Option(None, "--test", help="Test corpus TSV (clean labels are scored)."),
    non_entity: Optional[str] = typer.Option(None, "--non-entity", help="Tag excluded from micro F1, e.g. O."),
    noisy_columns: int = typer.Option(1, "--noisy-columns", min=1),
    label_set_names: Optional[str] = typer.Option(None, "--label-set-names"),
):
    """Accuracy, micro F1 and per-class F1 of a trained model on a test corpus."""
    def build(run: RunContext) -> ExperimentManifest:
        inputs = {"model": str(model)} if model else {}
        if test:
            inputs["test"] = str(test)
        return ExperimentManifest(
            subcommand=CommandName.EVAL,
            inputs=inputs,
            params={
                "non_entity": non_entity,
                "noisy_columns": noisy_columns,
                "label_set_names": parse_list(label_set_names, str, "label set"),
            },
            seed=run.seed,
            out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        model_path = require_input(manifest, "model")
        trained = load_model(model_path)
        labels = load_model_labels(model_path)
        data = load_aligned(manifest, "test", labels)
        if data.k != trained.k:
            raise InvalidParameterError(f"Test corpus has {data.k} classes, model has {trained.k}.")
        result = evaluate(trained, clean_data(data), _non_entity_index(data.label_names, manifest.param("non_entity")))
        write_json(out_dir / METRICS_FILE, result)
        logger.info(f"Accuracy={result.accuracy:.4f} micro-F1={result.micro_f1_excl:.4f} on {data.size} instances")

    dispatch(ctx, CommandName.EVAL, build, execute)


@command_logging(CommandName.CORRELATE.value)
def correlate(
    ctx: typer.Context,
    train_corpus: Optional[Path] = typer.Option(None, "--train", help="Training corpus TSV; blobs benchmark when omitted."),
    test_corpus: Optional[Path] = typer.Option(None, "--test", help="Test corpus TSV (required with --train)."),
    scheme: SamplingVariant = typer.Option(SamplingVariant.FIXED, "--scheme"),
    grid: str = typer.Option("5,10,25,50,100", "--grid", help="Clean instances per class, comma-separated."),
    repetitions: int = typer.Option(20, "--repetitions", min=2),
    fix_base_clean: Optional[int] = typer.Option(None, "--fix-base-clean", min=1),
    metric: Metric = typer.Option(Metric.ACCURACY, "--metric"),
    non_entity: Optional[str] = typer.Option(None, "--non-entity"),
    epochs: int = typer.Option(20, "--epochs", min=1),
    learning_rate: float = typer.Option(0.1, "--learning-rate"),
    batch_size: int = typer.Option(32, "--batch-size", min=1),
    noisy_multiplier: float = typer.Option(DEFAULT_NOISY_MULTIPLIER, "--noisy-multiplier"),
    noisy_columns: int = typer.Option(1, "--noisy-columns", min=1),
    label_set_names: Optional[str] = typer.Option(None, "--label-set-names"),
    label_set: Optional[str] = typer.Option(None, "--label-set"),
):
    """Expected estimation error against downstream test performance over a clean-size grid."""
    def build(run: RunContext) -> ExperimentManifest:
        inputs = {"train": str(train_corpus)} if train_corpus else {}
        if test_corpus:
            inputs["test"] = str(test_corpus)
        params = _training_params(epochs, learning_rate, batch_size, noisy_multiplier)
        params.update({
            "fix_base_clean": fix_base_clean,
            "metric": metric.value,
            "non_entity": non_entity,
            "noisy_columns": noisy_columns,
            "label_set_names": parse_list(label_set_names, str, "label set"),
            "label_set": label_set,
            "scheme": scheme.value,
        })
        values = parse_list(grid, int, "grid")
        if not values:
            raise InvalidParameterError("--grid must not be empty.")
        return ExperimentManifest(
            subcommand=CommandName.CORRELATE,
            inputs=inputs,
            grid=[float(v) for v in values],
            repetitions=repetitions,
            params=params,
            seed=run.seed,
            out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        config = train_config(manifest)
        truth = None
        if manifest.input_path("train"):
            train_data = load_corpus(manifest, "train")
            test_data = load_aligned(manifest, "test", train_data.label_names)
        else:
            benchmark = make_blobs_benchmark(config.seed)
            train_data, test_data, truth = benchmark.train, benchmark.test, benchmark.truth
        report = correlation_experiment(
            train_data,
            test_data,
            SamplingVariant(manifest.param("scheme", SamplingVariant.FIXED.value)),
            [int(v) for v in manifest.grid],
            manifest.repetitions,
            config,
            truth=truth,
            fix_base_clean=manifest.param("fix_base_clean"),
            metric=Metric(manifest.param("metric", Metric.ACCURACY.value)),
            non_entity=_non_entity_index(train_data.label_names, manifest.param("non_entity")),
            label_set=manifest.param("label_set"),
            threads=threads,
        )
        write_csv(out_dir / CORRELATION_FILE, CorrelationRow.header(), correlation_table(report))
        write_json(out_dir / CORRELATION_REPORT_FILE, report.model_dump(mode="json", exclude={"rows"}))
        logger.info(f"Pearson correlation {report.pearson} over {len(report.rows)} grid points")

    dispatch(ctx, CommandName.CORRELATE, build, execute)
