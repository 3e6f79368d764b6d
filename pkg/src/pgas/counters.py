"""
Per-rank access counters.

Each rank only ever increments its own counters, so no synchronization is needed;
counters are combined after the collective program has joined.
"""
from dataclasses import asdict, dataclass
from typing import Sequence

from src.models import CounterSnapshot, RankCounters

# Nominal payload widths in bytes
REAL_BYTES = 8
POSITION_RECORD_BYTES = 3 * REAL_BYTES
FORCE_RECORD_BYTES = 3 * REAL_BYTES
MOLECULE_RECORD_BYTES = 10 * REAL_BYTES  # id + position + velocity + force


@dataclass
class AccessCounters:
    local_element_reads: int = 0
    local_element_writes: int = 0
    remote_element_reads: int = 0
    remote_element_writes: int = 0
    bulk_gets: int = 0
    bulk_puts: int = 0
    bulk_bytes: int = 0
    lock_acquisitions: int = 0
    local_view_calls: int = 0
    shared_path_calls: int = 0
    inter_node_element_accesses: int = 0
    inter_node_transfers: int = 0

    def to_model(self) -> RankCounters:
        return RankCounters(**asdict(self))


def snapshot(counters: Sequence[AccessCounters]) -> CounterSnapshot:
    """Freeze per-rank counters and their totals into a serializable snapshot."""
    per_rank = [c.to_model() for c in counters]
    totals = {
        name: sum(getattr(c, name) for c in per_rank)
        for name in RankCounters.model_fields
    }
    return CounterSnapshot(ranks=per_rank, totals=RankCounters(**totals))
