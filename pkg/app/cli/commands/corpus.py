# app/cli/commands/corpus.py
from pathlib import Path
from typing import Optional

import typer
from loguru import logger

from app.cli.commands.common import RunContext, dispatch, load_corpus, parse_list
from app.const.enum import CommandName
from app.core.corpus import quality_report
from app.middleware.logging import command_logging
from app.models.manifest import ExperimentManifest
from app.storage.formats import write_json

QUALITY_FILE = "quality.json"


@command_logging(CommandName.QUALITY.value)
def quality(
    ctx: typer.Context,
    corpus: Optional[Path] = typer.Option(None, "--corpus", help="Parallel corpus TSV."),
    noisy_columns: int = typer.Option(1, "--noisy-columns", min=1),
    label_set_names: Optional[str] = typer.Option(None, "--label-set-names", help="Comma-separated names of the noisy columns."),
    label_set: Optional[str] = typer.Option(None, "--label-set", help="Noisy label set to score (default: first)."),
    non_entity: Optional[str] = typer.Option(None, "--non-entity", help="Tag excluded from precision/recall, e.g. O."),
    inventory: Optional[str] = typer.Option(None, "--inventory", help="Closed comma-separated tag inventory."),
):
    """Precision, recall and F1 of a noisy label set against the clean labels."""
    def build(run: RunContext) -> ExperimentManifest:
        return ExperimentManifest(
            subcommand=CommandName.QUALITY,
            inputs={"corpus": str(corpus)} if corpus else {},
            params={
                "noisy_columns": noisy_columns,
                "label_set_names": parse_list(label_set_names, str, "label set"),
                "label_set": label_set,
                "non_entity": non_entity,
                "inventory": parse_list(inventory, str, "inventory"),
            },
            seed=run.seed,
            out_dir=str(run.out_dir),
        )

    def execute(manifest: ExperimentManifest, out_dir: Path, threads: Optional[int]) -> None:
        data = load_corpus(manifest, "corpus")
        report = quality_report(data, manifest.param("label_set"), manifest.param("non_entity"))
        write_json(out_dir / QUALITY_FILE, report)
        logger.info(
            f"Label set '{report.label_set}': P={report.precision:.4f} R={report.recall:.4f} F1={report.f1:.4f}"
        )

    dispatch(ctx, CommandName.QUALITY, build, execute)
