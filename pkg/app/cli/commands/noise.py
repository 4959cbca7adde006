# app/cli/commands/noise.py
from pathlib import Path
from typing import List, Optional

import typer
from loguru import logger

from app.cli.commands.common import RunContext, dispatch, parse_flips, require_input, resolve_matrix
from app.const.enum import CommandName, NoiseKind
from app.core.errors import InvalidParameterError
from app.core.noise import build_noise_matrix, corrupt_labels
from app.core.utils import child_rng
from app.middleware.logging import command_logging
from app.models.estimation import LabelPairSet
from app.models.manifest import ExperimentManifest
from app.models.noise import NoiseSpec
from app.storage.formats import read_labels, save_noise_matrix, write_pairs

MATRIX_FILE = "matrix.json"
PAIRS_FILE = "pairs.tsv"


def noise_spec_or_none(
    kind: NoiseKind, k: int, epsilon: Optional[float], flip: Optional[List[str]]
) -> Optional[NoiseSpec]:
    """Synthetic spec from flags; None when no noise level was given."""
    if epsilon is None:
        return None
    return NoiseSpec(kind=kind, k=k, epsilon=epsilon, flips=parse_flips(flip))


@command_logging(CommandName.GEN_NOISE.value)
def gen_noise(
    ctx: typer.Context,
    kind: NoiseKind = typer.Option(NoiseKind.UNIFORM, "--kind", help="Noise pattern."),
    k: int = typer.Option(10, "--k", help="Number of classes."),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Noise level in [0, 1]."),
    flip: Optional[List[str]] = typer.Option(None, "--flip", help="Single-flip SOURCE:TARGET, repeatable."),
):
    """Write a synthetic noise matrix as JSON."""
    def build(run: RunContext) -> ExperimentManifest:
        spec = noise_spec_or_none(kind, k, epsilon, flip)
        if spec is None:
            raise InvalidParameterError("--epsilon is required.")
        return ExperimentManifest(
            subcommand=CommandName.GEN_NOISE, noise=spec, seed=run.seed, out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        matrix = build_noise_matrix(manifest.noise)
        save_noise_matrix(matrix, out_dir / MATRIX_FILE)
        logger.info(f"Noise matrix ({manifest.noise.kind.value}, k={matrix.k}) written to {out_dir / MATRIX_FILE}")

    dispatch(ctx, CommandName.GEN_NOISE, build, execute)


@command_logging(CommandName.CORRUPT.value)
def corrupt(
    ctx: typer.Context,
    labels: Optional[Path] = typer.Option(None, "--labels", help="Clean labels, one class index per line."),
    matrix: Optional[Path] = typer.Option(None, "--matrix", help="Noise matrix JSON."),
    kind: NoiseKind = typer.Option(NoiseKind.UNIFORM, "--kind"),
    k: int = typer.Option(10, "--k"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon"),
    flip: Optional[List[str]] = typer.Option(None, "--flip"),
):
    """Draw noisy labels for a clean label file; writes clean/noisy pairs."""
    def build(run: RunContext) -> ExperimentManifest:
        inputs = {"labels": str(labels)} if labels else {}
        if matrix:
            inputs["matrix"] = str(matrix)
        return ExperimentManifest(
            subcommand=CommandName.CORRUPT,
            inputs=inputs,
            noise=None if matrix else noise_spec_or_none(kind, k, epsilon, flip),
            seed=run.seed,
            out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        m = resolve_matrix(manifest)
        clean = read_labels(require_input(manifest, "labels"), m.k)
        noisy = corrupt_labels(clean, m, child_rng(manifest.seed))
        write_pairs(LabelPairSet(k=m.k, clean=clean, noisy=noisy), out_dir / PAIRS_FILE)
        logger.info(f"Corrupted {clean.size} labels into {out_dir / PAIRS_FILE}")

    dispatch(ctx, CommandName.CORRUPT, build, execute)
