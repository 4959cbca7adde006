# app/cli/commands/simulation.py
from pathlib import Path
from typing import List, Optional

import typer
from loguru import logger

from app.cli.commands.common import (
    RunContext, dispatch, load_corpus, parse_list, parse_prior, resolve_matrix, resolve_prior, with_scheme,
)
from app.cli.commands.noise import noise_spec_or_none
from app.const.enum import CommandName, GridAxis, NoiseKind, SamplingVariant
from app.core.config import DEFAULT_REPETITIONS
from app.core.errors import InvalidParameterError
from app.core.simulation import run_simulation, sweep as run_sweep
from app.dto.rows import RepetitionRow, SweepRow
from app.middleware.logging import command_logging
from app.models.manifest import ExperimentManifest
from app.models.simulation import CorpusSource, SimulationConfig, SyntheticSource
from app.storage.formats import write_json, write_rows

RESULT_FILE = "simulation.json"
REPETITIONS_FILE = "repetitions.csv"
SWEEP_FILE = "sweep.csv"


def _inputs(matrix: Optional[Path], corpus: Optional[Path]) -> dict:
    inputs = {}
    if matrix:
        inputs["matrix"] = str(matrix)
    if corpus:
        inputs["corpus"] = str(corpus)
    return inputs


def _corpus_params(noisy_columns: int, label_set_names: Optional[str], label_set: Optional[str], prior: Optional[str]) -> dict:
    return {
        "noisy_columns": noisy_columns,
        "label_set_names": parse_list(label_set_names, str, "label set"),
        "label_set": label_set,
        "prior": parse_prior(prior),
    }


def simulation_config(manifest: ExperimentManifest) -> SimulationConfig:
    if manifest.input_path("corpus"):
        source = CorpusSource(corpus=load_corpus(manifest, "corpus"), label_set=manifest.param("label_set"))
    else:
        m = None if manifest.noise is not None else resolve_matrix(manifest)
        source = SyntheticSource(matrix=m, spec=manifest.noise if m is None else None, prior=resolve_prior(
            manifest, m.k if m is not None else manifest.noise.k,
        ))
    return SimulationConfig(
        repetitions=manifest.repetitions or DEFAULT_REPETITIONS,
        scheme=manifest.scheme,
        source=source,
        master_seed=manifest.seed,
    )


@command_logging(CommandName.SIMULATE.value)
def simulate(
    ctx: typer.Context,
    matrix: Optional[Path] = typer.Option(None, "--matrix", help="Noise matrix JSON (synthetic source)."),
    corpus: Optional[Path] = typer.Option(None, "--corpus", help="Parallel corpus TSV (corpus source)."),
    kind: NoiseKind = typer.Option(NoiseKind.UNIFORM, "--kind"),
    k: int = typer.Option(10, "--k"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon"),
    flip: Optional[List[str]] = typer.Option(None, "--flip"),
    scheme: SamplingVariant = typer.Option(SamplingVariant.FIXED, "--scheme"),
    n: Optional[int] = typer.Option(None, "--n", min=0),
    repetitions: int = typer.Option(DEFAULT_REPETITIONS, "--repetitions", min=1),
    without_replacement: bool = typer.Option(False, "--without-replacement"),
    prior: Optional[str] = typer.Option(None, "--prior"),
    noisy_columns: int = typer.Option(1, "--noisy-columns", min=1),
    label_set_names: Optional[str] = typer.Option(None, "--label-set-names"),
    label_set: Optional[str] = typer.Option(None, "--label-set"),
):
    """Monte Carlo estimate of the squared error next to its closed form."""
    def build(run: RunContext) -> ExperimentManifest:
        manifest = ExperimentManifest(
            subcommand=CommandName.SIMULATE,
            inputs=_inputs(matrix, corpus),
            noise=None if (matrix or corpus) else noise_spec_or_none(kind, k, epsilon, flip),
            repetitions=repetitions,
            params=_corpus_params(noisy_columns, label_set_names, label_set, prior),
            seed=run.seed,
            out_dir=str(run.out_dir),
        )
        return with_scheme(manifest, scheme, n, replace=not without_replacement)

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        result = run_simulation(simulation_config(manifest), threads)
        write_json(out_dir / RESULT_FILE, result.model_dump(mode="json", exclude={"per_repetition_se"}))
        rows = [RepetitionRow(repetition=r, se=se) for r, se in enumerate(result.per_repetition_se or [])]
        write_rows(out_dir / REPETITIONS_FILE, rows, RepetitionRow)
        logger.info(f"Simulation written to {out_dir}")

    dispatch(ctx, CommandName.SIMULATE, build, execute)


@command_logging(CommandName.SWEEP.value)
def sweep(
    ctx: typer.Context,
    matrix: Optional[Path] = typer.Option(None, "--matrix"),
    corpus: Optional[Path] = typer.Option(None, "--corpus"),
    kind: NoiseKind = typer.Option(NoiseKind.UNIFORM, "--kind"),
    k: int = typer.Option(10, "--k"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Base noise level (sample-size sweeps)."),
    flip: Optional[List[str]] = typer.Option(None, "--flip"),
    scheme: SamplingVariant = typer.Option(SamplingVariant.FIXED, "--scheme"),
    n: Optional[int] = typer.Option(None, "--n", min=0, help="Sample size for noise-level sweeps."),
    axis: GridAxis = typer.Option(GridAxis.SAMPLE_SIZE, "--axis"),
    grid: Optional[str] = typer.Option(None, "--grid", help="Comma-separated grid values."),
    repetitions: int = typer.Option(DEFAULT_REPETITIONS, "--repetitions", min=1),
    without_replacement: bool = typer.Option(False, "--without-replacement"),
    prior: Optional[str] = typer.Option(None, "--prior"),
    noisy_columns: int = typer.Option(1, "--noisy-columns", min=1),
    label_set_names: Optional[str] = typer.Option(None, "--label-set-names"),
    label_set: Optional[str] = typer.Option(None, "--label-set"),
):
    """One simulation per grid point; writes plot-ready CSV."""
    def build(run: RunContext) -> ExperimentManifest:
        values = parse_list(grid, float, "grid")
        if not values:
            raise InvalidParameterError("--grid is required.")
        base_epsilon = epsilon if epsilon is not None else (values[0] if axis == GridAxis.NOISE_LEVEL else None)
        manifest = ExperimentManifest(
            subcommand=CommandName.SWEEP,
            inputs=_inputs(matrix, corpus),
            noise=None if (matrix or corpus) else noise_spec_or_none(kind, k, base_epsilon, flip),
            axis=axis,
            grid=values,
            repetitions=repetitions,
            params=_corpus_params(noisy_columns, label_set_names, label_set, prior),
            seed=run.seed,
            out_dir=str(run.out_dir),
        )
        return with_scheme(manifest, scheme, n, replace=not without_replacement)

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        table = run_sweep(simulation_config(manifest), manifest.axis, manifest.grid, threads)
        write_rows(out_dir / SWEEP_FILE, [row for row, _ in table], SweepRow)
        logger.info(f"Sweep over {len(table)} points written to {out_dir / SWEEP_FILE}")

    dispatch(ctx, CommandName.SWEEP, build, execute)
