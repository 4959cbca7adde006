# app/cli/commands/common.py
from pathlib import Path
from typing import Callable, List, Optional

import typer
from loguru import logger
from pydantic import BaseModel, ConfigDict

from app.const.enum import CommandName, GridAxis, SamplingVariant
from app.core.errors import InvalidParameterError
from app.core.noise import build_noise_matrix
from app.middleware.seed_guard import check_seed
from app.models.corpus import ParallelCorpus, TsvSchema
from app.models.estimation import SamplingScheme
from app.models.manifest import ExperimentManifest
from app.models.noise import ClassPrior, FlipSpec, NoiseMatrix
from app.storage.corpus_files import load_pair_corpus, load_tsv_corpus
from app.storage.formats import load_noise_matrix, read_json, write_json

MANIFEST_FILE = "manifest.json"


class RunContext(BaseModel):
    """Global options shared by every subcommand."""
    model_config = ConfigDict(frozen=True)
    seed: Optional[int] = None
    out_dir: Path = Path("results")
    threads: Optional[int] = None
    manifest_path: Optional[Path] = None


def run_context(ctx: typer.Context) -> RunContext:
    return ctx.obj if isinstance(ctx.obj, RunContext) else RunContext()


# --- Option parsing ---

def parse_list(text: Optional[str], cast: Callable, what: str) -> Optional[list]:
    if text is None or not text.strip():
        return None
    try:
        return [cast(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidParameterError(f"Cannot parse {what} list '{text}'.")


def parse_flips(flips: Optional[List[str]]) -> Optional[FlipSpec]:
    """'i:j' items (or 'i->j') into a FlipSpec."""
    if not flips:
        return None
    mapping = []
    for item in flips:
        source, sep, target = item.replace("->", ":").partition(":")
        if not sep:
            raise InvalidParameterError(f"Flip '{item}' must look like SOURCE:TARGET.")
        try:
            mapping.append((int(source), int(target)))
        except ValueError:
            raise InvalidParameterError(f"Flip '{item}' must use integer class indices.")
    return FlipSpec(mapping=mapping)


def parse_prior(text: Optional[str]) -> Optional[List[float]]:
    return parse_list(text, float, "prior")


def build_scheme(variant: SamplingVariant, n: Optional[int], k: int, replace: bool = True) -> SamplingScheme:
    """Fixed: n per class; Variable: n in total."""
    if n is None:
        raise InvalidParameterError("Sample size --n is required.")
    if variant == SamplingVariant.FIXED:
        return SamplingScheme.fixed([n] * k, replace=replace)
    return SamplingScheme.variable(n, replace=replace)


# --- Manifest-driven inputs ---

def require_input(manifest: ExperimentManifest, role: str) -> Path:
    path = manifest.input_path(role)
    if not path:
        raise InvalidParameterError(f"Missing input '{role}' (pass --{role}).")
    return Path(path)


def resolve_matrix(manifest: ExperimentManifest) -> NoiseMatrix:
    if manifest.input_path("matrix"):
        return load_noise_matrix(Path(manifest.input_path("matrix")))
    if manifest.noise is not None:
        return build_noise_matrix(manifest.noise)
    raise InvalidParameterError("Give a noise matrix file (--matrix) or a synthetic noise spec (--kind, --epsilon).")


def resolve_prior(manifest: ExperimentManifest, k: int) -> Optional[ClassPrior]:
    probs = manifest.param("prior")
    return ClassPrior(k=k, probs=probs) if probs is not None else None


def corpus_schema(manifest: ExperimentManifest) -> TsvSchema:
    return TsvSchema(
        noisy_columns=manifest.param("noisy_columns", 1),
        label_set_names=manifest.param("label_set_names"),
        label_inventory=manifest.param("inventory"),
    )


def load_corpus(manifest: ExperimentManifest, role: str) -> ParallelCorpus:
    path = require_input(manifest, role)
    if path.suffix.lower() == ".csv":
        return load_pair_corpus(path, manifest.param("k"))
    return load_tsv_corpus(path, corpus_schema(manifest))


# --- Dispatch ---

def load_manifest(path: Path) -> ExperimentManifest:
    return ExperimentManifest.model_validate(read_json(path))


def dispatch(
    ctx: typer.Context,
    command: CommandName,
    build: Callable[[RunContext], ExperimentManifest],
    execute: Callable[[ExperimentManifest, Path, Optional[int]], None],
) -> ExperimentManifest:
    """
    Compiles flags into a manifest (or loads --manifest), checks it, runs the
    command into the manifest's output directory and stores the manifest there.
    """
    run = run_context(ctx)
    if run.manifest_path is not None:
        manifest = load_manifest(run.manifest_path)
        if manifest.subcommand != command:
            raise InvalidParameterError(
                f"Manifest is for '{manifest.subcommand.value}', not '{command.value}'."
            )
        logger.info(f"Running '{command.value}' from manifest {run.manifest_path}")
    else:
        manifest = build(run)
    check_seed(manifest)
    out_dir = Path(manifest.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    execute(manifest, out_dir, run.threads)
    write_json(out_dir / MANIFEST_FILE, manifest)
    return manifest


def source_k(manifest: ExperimentManifest) -> int:
    """Class count of the manifest's ground truth (corpus, matrix file or spec)."""
    if manifest.input_path("corpus"):
        return load_corpus(manifest, "corpus").k
    return resolve_matrix(manifest).k


def with_scheme(
    manifest: ExperimentManifest, variant: SamplingVariant, n: Optional[int], replace: bool = True
) -> ExperimentManifest:
    """Fills in the scheme once the class count is known; a sample-size grid supplies n when missing."""
    if n is None and manifest.grid and manifest.axis == GridAxis.SAMPLE_SIZE:
        n = int(manifest.grid[0])
    scheme = build_scheme(variant, n, source_k(manifest), replace)
    return manifest.model_copy(update={"scheme": scheme})
