# app/cli/commands/estimation.py
from pathlib import Path
from typing import Optional

import typer
from loguru import logger

from app.cli.commands.common import RunContext, dispatch, require_input
from app.const.enum import CommandName
from app.core.estimation import estimate_noise_matrix
from app.middleware.logging import command_logging
from app.models.manifest import ExperimentManifest
from app.storage.formats import read_pairs, save_estimate

ESTIMATE_FILE = "estimate.json"


@command_logging(CommandName.ESTIMATE.value)
def estimate(
    ctx: typer.Context,
    pairs: Optional[Path] = typer.Option(None, "--pairs", help="clean<TAB>noisy pairs (or clean,noisy CSV)."),
    k: Optional[int] = typer.Option(None, "--k", min=1, help="Number of classes; inferred when omitted."),
):
    """Estimate the noise matrix from clean/noisy pairs."""
    def build(run: RunContext) -> ExperimentManifest:
        return ExperimentManifest(
            subcommand=CommandName.ESTIMATE,
            inputs={"pairs": str(pairs)} if pairs else {},
            params={"k": k},
            seed=run.seed,
            out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        label_pairs = read_pairs(require_input(manifest, "pairs"), manifest.param("k"))
        result = estimate_noise_matrix(label_pairs)
        save_estimate(result, out_dir / ESTIMATE_FILE)
        if result.empty_rows:
            logger.warning(f"Rows {result.empty_rows} have no pairs and are left at zero")
        logger.info(f"Estimated {result.k}x{result.k} matrix from {len(label_pairs)} pairs")

    dispatch(ctx, CommandName.ESTIMATE, build, execute)
