# app/cli/app.py
from pathlib import Path
from typing import Optional

import typer

# Import semua command modules
from app.cli.commands import corpus, estimation, noise, simulation, theory, training
from app.cli.commands.common import RunContext
from app.const.enum import CommandName
from app.core.config import setup_logging

cli_app = typer.Typer(
    name="noise-oracle",
    help="Noise transition matrix estimation, expected error and seeded experiments.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)


@cli_app.callback()
def main_options(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, "--seed", min=0, max=2**64 - 1, help="Master seed (64-bit)."),
    out_dir: Path = typer.Option(Path("results"), "--out-dir", help="Output directory."),
    threads: Optional[int] = typer.Option(
        None, "--threads", min=1, envvar="NOISE_ORACLE_THREADS", help="Worker threads for repetitions."
    ),
    manifest: Optional[Path] = typer.Option(None, "--manifest", help="Run a stored manifest instead of flags."),
):
    setup_logging()
    ctx.obj = RunContext(seed=seed, out_dir=out_dir, threads=threads, manifest_path=manifest)


# Register subcommands
cli_app.command(CommandName.GEN_NOISE.value)(noise.gen_noise)
cli_app.command(CommandName.CORRUPT.value)(noise.corrupt)
cli_app.command(CommandName.ESTIMATE.value)(estimation.estimate)
cli_app.command(CommandName.EXPECTED_ERROR.value)(theory.expected_error)
cli_app.command(CommandName.SIMULATE.value)(simulation.simulate)
cli_app.command(CommandName.SWEEP.value)(simulation.sweep)
cli_app.command(CommandName.QUALITY.value)(corpus.quality)
cli_app.command(CommandName.TRAIN.value)(training.train)
cli_app.command(CommandName.EVAL.value)(training.eval_model)
cli_app.command(CommandName.CORRELATE.value)(training.correlate)
