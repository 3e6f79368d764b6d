"""
Runs one collective program on one thread per rank.
"""
import logging
import threading
from typing import Callable, List, Optional, TypeVar

from src.errors import CollectiveAbortedError
from src.pgas.shared_space import SharedSpace

logger = logging.getLogger(__name__)

T = TypeVar("T")


def run_ranks(space: SharedSpace, program: Callable[[int], T]) -> List[T]:
    """
    Execute ``program(rank)`` for every rank concurrently and return the results.

    If any rank raises, the collectives are aborted so that peers blocked in a
    barrier are released, and the first error that is not such an abort is
    re-raised after all threads have joined.
    """
    collectives = space.collectives
    collectives.reset()
    results: List[Optional[T]] = [None] * space.ranks
    errors: List[Optional[BaseException]] = [None] * space.ranks

    def _rank_main(rank: int) -> None:
        try:
            collectives.begin(rank)
            results[rank] = program(rank)
            collectives.finish(rank)
        except BaseException as e:  # noqa: BLE001 - re-raised on the controller thread
            errors[rank] = e
            collectives.abort()

    threads = [
        threading.Thread(target=_rank_main, args=(rank,), name=f"rank-{rank}", daemon=True)
        for rank in range(space.ranks)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    failures = [e for e in errors if e is not None]
    if failures:
        primary = next(
            (e for e in failures if not isinstance(e, CollectiveAbortedError)), failures[0]
        )
        logger.error(f"Collective program failed on {len(failures)} rank(s): {primary}")
        raise primary
    return results
