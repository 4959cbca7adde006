# app/scheduler/workers.py
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from app.core.config import DEFAULT_THREADS

logger = logging.getLogger("scheduler_workers")

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: int = None) -> int:
    if threads is None:
        return DEFAULT_THREADS
    return max(1, int(threads))


def run_ordered(job: Callable[[T], R], items: Iterable[T], threads: int = None) -> List[R]:
    """
    Runs independent jobs, returning results in input order whatever the
    worker count. Jobs must not share mutable state.
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [job(item) for item in items]
    logger.debug(f"Dispatching {len(items)} jobs to {workers} worker threads")
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="noise-oracle") as pool:
        # Executor.map menjaga urutan input
        return list(pool.map(job, items))
