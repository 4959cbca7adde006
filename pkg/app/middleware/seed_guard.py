# app/middleware/seed_guard.py
from typing import Set

from loguru import logger

from app.const.enum import CommandName
from app.core.errors import MissingSeedError
from app.models.manifest import ExperimentManifest

# Commands whose manifests must carry a seed (every command that draws random numbers, plus eval)
SEEDED_COMMANDS: Set[CommandName] = {
    CommandName.CORRUPT,
    CommandName.SIMULATE,
    CommandName.SWEEP,
    CommandName.TRAIN,
    CommandName.EVAL,
    CommandName.CORRELATE,
}


def requires_seed(command: CommandName) -> bool:
    return command in SEEDED_COMMANDS


def check_seed(manifest: ExperimentManifest) -> ExperimentManifest:
    if requires_seed(manifest.subcommand) and manifest.seed is None:
        logger.warning(f"Rejected seedless manifest for '{manifest.subcommand.value}'")
        raise MissingSeedError(
            f"Command '{manifest.subcommand.value}' needs a seed: pass --seed or set 'seed' in the manifest."
        )
    return manifest
