# app/core/utils.py
import csv
import logging
import math
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from app.core.errors import InvalidParameterError

logger = logging.getLogger(__name__)

MAX_SEED = 2**64


def _check_seed(master_seed: int) -> int:
    if not 0 <= int(master_seed) < MAX_SEED:
        raise InvalidParameterError(f"Seed must be a 64-bit non-negative integer, got {master_seed}.")
    return int(master_seed)


def child_seed_sequence(master_seed: int, *counter: int) -> np.random.SeedSequence:
    """
    Counter-based split of a master seed: the child stream depends only on
    (master_seed, counter...), never on the order in which children are requested.
    """
    return np.random.SeedSequence(entropy=_check_seed(master_seed), spawn_key=tuple(int(c) for c in counter))


def child_rng(master_seed: int, *counter: int) -> np.random.Generator:
    return np.random.default_rng(child_seed_sequence(master_seed, *counter))


def derive_seed(master_seed: int, *counter: int) -> int:
    """Next 64-bit seed for a named position, e.g. (grid_index,) in a sweep."""
    state = child_seed_sequence(master_seed, *counter).generate_state(1, dtype=np.uint64)
    value = int(state[0])
    logger.debug(f"Derived seed {value} from master {master_seed} at {counter}")
    return value


def compensated_sum(values: Iterable[float]) -> float:
    """Exactly rounded float sum."""
    return math.fsum(float(v) for v in values)


def format_float(value: float) -> str:
    """Shortest text that round-trips to the same double."""
    return repr(float(value))


def split_budget(total: int, k: int) -> List[int]:
    """Split `total` into k per-class counts differing by at most one."""
    if k <= 0 or total < 0:
        raise InvalidParameterError(f"Cannot split budget {total} over {k} classes.")
    base, extra = divmod(int(total), int(k))
    return [base + 1 if i < extra else base for i in range(k)]


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else ("" if v is None else v) for v in row])
    logger.debug(f"Wrote CSV {path}")
    return path
