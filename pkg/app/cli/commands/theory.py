# app/cli/commands/theory.py
from pathlib import Path
from typing import List, Optional

import typer
from loguru import logger

from app.cli.commands.common import (
    RunContext, dispatch, parse_list, parse_prior, resolve_matrix, resolve_prior, with_scheme,
)
from app.cli.commands.noise import noise_spec_or_none
from app.const.enum import CommandName, GridAxis, NoiseKind, SamplingVariant
from app.core.theory import error_curve, expected_error_from_scheme
from app.dto.rows import CurveRow
from app.middleware.logging import command_logging
from app.models.manifest import ExperimentManifest
from app.storage.formats import write_json, write_rows

CURVE_FILE = "expected_error.csv"
REPORT_FILE = "expected_error.json"


@command_logging(CommandName.EXPECTED_ERROR.value)
def expected_error(
    ctx: typer.Context,
    matrix: Optional[Path] = typer.Option(None, "--matrix", help="Noise matrix JSON."),
    kind: NoiseKind = typer.Option(NoiseKind.UNIFORM, "--kind"),
    k: int = typer.Option(10, "--k"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon"),
    flip: Optional[List[str]] = typer.Option(None, "--flip"),
    scheme: SamplingVariant = typer.Option(SamplingVariant.FIXED, "--scheme"),
    n: Optional[int] = typer.Option(None, "--n", min=0, help="n_i per class (fixed) or total n (variable)."),
    prior: Optional[str] = typer.Option(None, "--prior", help="Comma-separated class prior (variable)."),
    axis: GridAxis = typer.Option(GridAxis.SAMPLE_SIZE, "--axis"),
    grid: Optional[str] = typer.Option(None, "--grid", help="Comma-separated grid values."),
):
    """Closed-form expected squared error, at one point or over a grid."""
    def build(run: RunContext) -> ExperimentManifest:
        manifest = ExperimentManifest(
            subcommand=CommandName.EXPECTED_ERROR,
            inputs={"matrix": str(matrix)} if matrix else {},
            noise=None if matrix else noise_spec_or_none(kind, k, epsilon, flip),
            axis=axis,
            grid=parse_list(grid, float, "grid"),
            params={"prior": parse_prior(prior)},
            seed=run.seed,
            out_dir=str(run.out_dir),
        )
        return with_scheme(manifest, scheme, n)

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        m = resolve_matrix(manifest)
        class_prior = resolve_prior(manifest, m.k)
        if manifest.grid:
            source = manifest.noise if manifest.noise is not None else m
            rows = error_curve(source, manifest.scheme, manifest.grid, manifest.axis or GridAxis.SAMPLE_SIZE, class_prior)
        else:
            report = expected_error_from_scheme(m, manifest.scheme, class_prior)
            write_json(out_dir / REPORT_FILE, report)
            size = manifest.scheme.total if manifest.scheme.variant == SamplingVariant.VARIABLE else manifest.scheme.per_class[0]
            rows = [CurveRow(grid_value=float(size), expected_se=report.total)]
        write_rows(out_dir / CURVE_FILE, rows, CurveRow)
        logger.info(f"Expected error at {len(rows)} point(s) written to {out_dir / CURVE_FILE}")

    dispatch(ctx, CommandName.EXPECTED_ERROR, build, execute)
