"""Ordered worker-pool map used by the Monte Carlo and enumeration drivers."""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def ordered_map(fn: Callable[..., T], tasks: Sequence[tuple[Any, ...]], workers: int = 1) -> list[T]:
    """Apply ``fn(*task)`` to every task and return results in task order.

    ``fn`` must be a module-level function so it can be pickled. With one
    worker (or a single task) everything runs in the calling process.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]

    workers = min(workers, len(tasks))
    logger.debug(f"Dispatching {len(tasks)} task(s) to {workers} worker(s)")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *task) for task in tasks]
        return [f.result() for f in futures]
