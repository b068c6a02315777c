"""
Concurrent execution of branch pipelines.

Workers are plain functions run through asyncio.to_thread behind a
semaphore; results come back in input order so merges stay deterministic.
"""

import asyncio
import logging
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger("parametric_lmi.branch_runner")

T = TypeVar("T")


@dataclass
class RunOutcome:
    """Per-item results (a value, an exception, or None when never started)."""

    results: List[Any]
    accepted: Optional[int] = None

    @property
    def skipped(self) -> int:
        return sum(1 for r in self.results if r is None)


async def gather_branches(items: Sequence[T], worker: Callable[[T], Any], jobs: int = 1) -> List[Any]:
    """
    Run ``worker`` on every item with at most ``jobs`` in flight.

    Returns:
        List of results or exceptions, in input order
    """
    semaphore = asyncio.Semaphore(max(1, jobs))

    async def limited(item: T):
        async with semaphore:
            try:
                return await asyncio.to_thread(worker, item)
            except Exception as e:
                return e

    results = await asyncio.gather(*(limited(item) for item in items))
    logger.info(f"Completed {len(items)} branch pipelines with jobs={jobs}")
    return list(results)


async def gather_until_positive(
    items: Sequence[T],
    worker: Callable[[T], Any],
    accept: Callable[[Any], bool],
    jobs: int = 1,
) -> RunOutcome:
    """
    Like gather_branches, but items after an accepted one are not started.

    The reported index is the smallest accepted one, independent of
    completion order: no item before it is ever skipped.
    """
    semaphore = asyncio.Semaphore(max(1, jobs))
    results: List[Any] = [None] * len(items)
    best: List[Optional[int]] = [None]

    async def limited(index: int, item: T):
        async with semaphore:
            if best[0] is not None and index > best[0]:
                return
            try:
                result = await asyncio.to_thread(worker, item)
            except Exception as e:
                result = e
            results[index] = result
            if not isinstance(result, Exception) and accept(result):
                if best[0] is None or index < best[0]:
                    best[0] = index
                    logger.debug(f"Item {index} accepted")

    await asyncio.gather(*(limited(i, item) for i, item in enumerate(items)))
    return RunOutcome(results, best[0])


def run_branches(items: Sequence[T], worker: Callable[[T], Any], jobs: int = 1) -> List[Any]:
    if jobs <= 1:
        results = []
        for item in items:
            try:
                results.append(worker(item))
            except Exception as e:
                results.append(e)
        return results
    return asyncio.run(gather_branches(items, worker, jobs))


def run_until_positive(
    items: Sequence[T],
    worker: Callable[[T], Any],
    accept: Callable[[Any], bool],
    jobs: int = 1,
) -> RunOutcome:
    if jobs <= 1:
        results: List[Any] = [None] * len(items)
        for index, item in enumerate(items):
            try:
                results[index] = worker(item)
            except Exception as e:
                results[index] = e
                continue
            if accept(results[index]):
                return RunOutcome(results, index)
        return RunOutcome(results, None)
    return asyncio.run(gather_until_positive(items, worker, accept, jobs))
