"""
Barrier and all-reduce for the rank threads.

Two schedules share one interface:

* THREADED: ranks run concurrently; the barrier is a ``threading.Barrier``.
* LOCKSTEP: ranks still run on their own threads, but between two barriers only
  one rank runs at a time, in ascending rank order. Every interleaving-dependent
  floating-point sum then happens in a fixed order, so runs are bitwise repeatable.
"""
import logging
import threading
from typing import List

from src.errors import CollectiveAbortedError
from src.models import Schedule

logger = logging.getLogger(__name__)


class Collectives:
    """Collective operations for a fixed number of ranks."""

    def __init__(self, ranks: int, schedule: Schedule, timeout: float = 600.0) -> None:
        self.ranks = ranks
        self.schedule = schedule
        self.timeout = timeout
        self._cond = threading.Condition()
        self.reset()

    def reset(self) -> None:
        """Prepare for a new collective program."""
        self._barrier = threading.Barrier(self.ranks, timeout=self.timeout)
        self._turn = 0
        self._generation = 0
        self._aborted = False
        self._slots: List[float] = [0.0] * self.ranks
        self._result = 0.0

    def _wait(self, predicate) -> None:
        ok = self._cond.wait_for(lambda: self._aborted or predicate(), timeout=self.timeout)
        if self._aborted:
            raise CollectiveAbortedError("collective aborted by a failing rank")
        if not ok:
            raise CollectiveAbortedError(f"collective timed out after {self.timeout}s")

    def begin(self, rank: int) -> None:
        """Called by each rank thread before its first phase."""
        if self.schedule is Schedule.LOCKSTEP:
            with self._cond:
                self._wait(lambda: self._turn == rank)

    def finish(self, rank: int) -> None:
        """Called by each rank thread when its program returns."""
        if self.schedule is Schedule.LOCKSTEP:
            with self._cond:
                self._advance_turn()

    def _advance_turn(self) -> None:
        self._turn += 1
        if self._turn == self.ranks:
            self._turn = 0
            self._generation += 1
        self._cond.notify_all()

    def barrier(self, rank: int) -> None:
        """No rank returns until every rank has arrived."""
        if self.schedule is Schedule.THREADED:
            try:
                self._barrier.wait()
            except threading.BrokenBarrierError as e:
                raise CollectiveAbortedError("barrier broken by a failing rank") from e
            return
        with self._cond:
            arrival = self._generation
            self._advance_turn()
            self._wait(lambda: self._generation != arrival and self._turn == rank)

    def abort(self) -> None:
        """Release every waiting rank with CollectiveAbortedError."""
        with self._cond:
            self._aborted = True
            self._cond.notify_all()
        self._barrier.abort()

    def all_reduce_sum(self, rank: int, partial: float) -> float:
        """
        Sum one partial per rank; every rank receives the same total.

        Partials are gathered on rank 0 and added in ascending rank order, then the
        total is broadcast.
        """
        self._slots[rank] = float(partial)
        self.barrier(rank)
        if rank == 0:
            total = 0.0
            for value in self._slots:
                total += value
            self._result = total
        self.barrier(rank)
        return self._result
