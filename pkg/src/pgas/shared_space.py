"""
Instrumented partitioned shared space.

Cells live in the partition of the rank with affinity to them. Any rank can reach
any cell through the element-wise shared path (``element_get``/``element_put``) or
the bulk path (``bulk_get``/``bulk_put_forces``); the owner may instead take a
``LocalView``. Every access is counted against the calling rank, and "remote" is
decided purely by affinity.
"""
import logging
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from enum import StrEnum
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.core.cell_grid import CellGrid
from src.core.phasespace import MoleculeRecords, PhaseSpace
from src.errors import (
    AccessModeError,
    AddressingError,
    AffinityError,
    CapacityError,
    PhaseError,
    StalenessError,
)
from src.models import AccessMode, CounterSnapshot, Schedule
from src.pgas.collectives import Collectives
from src.pgas.counters import (
    FORCE_RECORD_BYTES,
    MOLECULE_RECORD_BYTES,
    POSITION_RECORD_BYTES,
    AccessCounters,
    snapshot,
)

logger = logging.getLogger(__name__)


class Field(StrEnum):
    """Addressable scalar fields of a molecule slot."""
    X = "x"
    Y = "y"
    Z = "z"
    VX = "vx"
    VY = "vy"
    VZ = "vz"
    FX = "fx"
    FY = "fy"
    FZ = "fz"


POSITION_FIELDS = (Field.X, Field.Y, Field.Z)
VELOCITY_FIELDS = (Field.VX, Field.VY, Field.VZ)
FORCE_FIELDS = (Field.FX, Field.FY, Field.FZ)

_FIELD_LAYOUT: Dict[Field, Tuple[str, int]] = {
    **{f: ("positions", c) for c, f in enumerate(POSITION_FIELDS)},
    **{f: ("velocities", c) for c, f in enumerate(VELOCITY_FIELDS)},
    **{f: ("forces", c) for c, f in enumerate(FORCE_FIELDS)},
}


class Phase(StrEnum):
    """Debug tag of the phase a rank is currently executing."""
    SETUP = "setup"
    ZERO = "zero"
    FORCE = "force"
    KICK = "kick"
    DRIFT = "drift"
    MIGRATE = "migrate"
    OBSERVE = "observe"


_WRITABLE_IN: Dict[str, frozenset] = {
    "positions": frozenset({Phase.SETUP, Phase.DRIFT, Phase.MIGRATE}),
    "velocities": frozenset({Phase.SETUP, Phase.KICK, Phase.MIGRATE}),
    "forces": frozenset({Phase.SETUP, Phase.ZERO, Phase.FORCE, Phase.MIGRATE}),
}


class Cell:
    """Fixed-capacity molecule container guarded by one lock."""

    __slots__ = ("id", "ids", "positions", "velocities", "forces", "count", "lock")

    def __init__(self, cell_id: int, capacity: int) -> None:
        self.id = cell_id
        self.ids = np.full(capacity, -1, dtype=np.int64)
        self.positions = np.zeros((capacity, 3))
        self.velocities = np.zeros((capacity, 3))
        self.forces = np.zeros((capacity, 3))
        self.count = 0
        self.lock = threading.Lock()

    @property
    def capacity(self) -> int:
        return len(self.ids)

    def records(self) -> MoleculeRecords:
        n = self.count
        return MoleculeRecords(
            ids=self.ids[:n].copy(),
            positions=self.positions[:n].copy(),
            velocities=self.velocities[:n].copy(),
            forces=self.forces[:n].copy(),
        )

    def append(self, records: MoleculeRecords) -> None:
        n, k = self.count, len(records)
        if n + k > self.capacity:
            raise CapacityError(
                f"cell {self.id} holds {n} of {self.capacity} molecules, cannot add {k}"
            )
        self.ids[n:n + k] = records.ids
        self.positions[n:n + k] = records.positions
        self.velocities[n:n + k] = records.velocities
        self.forces[n:n + k] = records.forces
        self.count = n + k

    def remove(self, rows: np.ndarray) -> MoleculeRecords:
        """Take the given slots out, keeping the remaining slots in order."""
        n = self.count
        keep = np.ones(n, dtype=bool)
        keep[rows] = False
        taken = self.records().take(~keep)
        m = int(keep.sum())
        for name in ("ids", "positions", "velocities", "forces"):
            arr = getattr(self, name)
            arr[:m] = arr[:n][keep]
        self.count = m
        return taken


@dataclass
class PrefetchBuffer:
    """Private copy of a cell's positions plus a zeroed force accumulator."""
    cell_id: int
    positions: np.ndarray
    forces: np.ndarray

    def __len__(self) -> int:
        return len(self.positions)


class LocalView:
    """Direct access of an owner to one of its cells, bypassing the shared path."""

    def __init__(self, space: "SharedSpace", rank: int, cell: Cell) -> None:
        self._space = space
        self._rank = rank
        self._cell = cell
        self._counters = space.counters[rank]

    @property
    def cell_id(self) -> int:
        return self._cell.id

    @property
    def count(self) -> int:
        return self._cell.count

    def _read(self, name: str) -> np.ndarray:
        n = self._cell.count
        self._counters.local_element_reads += n
        view = getattr(self._cell, name)[:n].view()
        view.flags.writeable = False
        return view

    def positions(self) -> np.ndarray:
        return self._read("positions")

    def velocities(self) -> np.ndarray:
        return self._read("velocities")

    def forces(self) -> np.ndarray:
        return self._read("forces")

    def read_position(self, slot: int) -> np.ndarray:
        self._check_slot(slot)
        self._counters.local_element_reads += 1
        return self._cell.positions[slot].copy()

    def _check_slot(self, slot: int) -> None:
        if not 0 <= slot < self._cell.count:
            raise AddressingError(f"slot {slot} outside cell {self._cell.id} ({self._cell.count})")

    def _write(self, name: str, rows: int) -> np.ndarray:
        self._space.check_write(self._rank, name)
        self._counters.local_element_writes += rows
        return getattr(self._cell, name)

    def add_force(self, slot: int, force: np.ndarray) -> None:
        self._check_slot(slot)
        self._write("forces", 1)[slot] += force

    def add_forces(self, forces: np.ndarray) -> None:
        n = self._cell.count
        self._write("forces", n)[:n] += forces

    def zero_forces(self) -> None:
        n = self._cell.count
        self._write("forces", n)[:n] = 0.0

    def set_velocities(self, velocities: np.ndarray) -> None:
        n = self._cell.count
        self._write("velocities", n)[:n] = velocities

    def set_positions(self, positions: np.ndarray) -> None:
        n = self._cell.count
        self._write("positions", n)[:n] = positions


class SharedSpace:
    """Cells partitioned over ranks, with accounted access paths and collectives."""

    def __init__(
        self,
        grid: CellGrid,
        partitions: List[Dict[int, Cell]],
        access_mode: AccessMode = AccessMode.LOCAL_VIEW,
        collectives: Optional[Collectives] = None,
        node_size: Optional[int] = None,
    ) -> None:
        self.grid = grid
        self.partitions = partitions
        self.access_mode = access_mode
        self.collectives = collectives or Collectives(grid.ranks, Schedule.LOCKSTEP)
        self.node_size = node_size or grid.ranks
        self.counters = [AccessCounters() for _ in range(grid.ranks)]
        self.box = grid.domain_lengths
        self._owners = grid.owners
        self._cells: List[Cell] = [None] * grid.cell_count
        for partition in partitions:
            for cell_id, cell in partition.items():
                self._cells[cell_id] = cell
        self._phases = [Phase.SETUP] * grid.ranks

    @property
    def ranks(self) -> int:
        return self.grid.ranks

    # ------------------------------------------------------------------
    # Affinity and bookkeeping (pure queries, not counted)
    # ------------------------------------------------------------------
    def affinity(self, cell_id: int) -> int:
        return self._owners[cell_id]

    def owned_cells(self, rank: int) -> List[int]:
        return sorted(self.partitions[rank])

    def partition(self, rank: int) -> Mapping[int, Cell]:
        return self.partitions[rank]

    def storage(self, cell_id: int) -> Cell:
        return self._cells[cell_id]

    def cell_size(self, cell_id: int) -> int:
        return self._cells[cell_id].count

    def molecule_count(self) -> int:
        return sum(cell.count for cell in self._cells)

    def node_of(self, rank: int) -> int:
        return rank // self.node_size

    def _crosses_nodes(self, rank: int, cell_id: int) -> bool:
        return self.node_of(rank) != self.node_of(self._owners[cell_id])

    # ------------------------------------------------------------------
    # Phase tags
    # ------------------------------------------------------------------
    def enter_phase(self, rank: int, phase: Phase) -> None:
        self._phases[rank] = phase

    def check_write(self, rank: int, array_name: str) -> None:
        phase = self._phases[rank]
        if phase not in _WRITABLE_IN[array_name]:
            raise PhaseError(f"rank {rank} wrote {array_name} during the {phase} phase")

    # ------------------------------------------------------------------
    # Access paths
    # ------------------------------------------------------------------
    def local_view(self, rank: int, cell_id: int) -> LocalView:
        """
        Direct access for the owner of a cell.

        Raises:
            AccessModeError: In the shared-only access mode.
            AffinityError: If the rank does not own the cell.
        """
        if self.access_mode is AccessMode.SHARED_ONLY:
            raise AccessModeError("local views are disabled in the shared-only access mode")
        if self._owners[cell_id] != rank:
            raise AffinityError(
                f"rank {rank} has no affinity to cell {cell_id} "
                f"(owner {self._owners[cell_id]})"
            )
        self.counters[rank].local_view_calls += 1
        return LocalView(self, rank, self._cells[cell_id])

    def _address(self, cell_id: int, slot: int, field) -> Tuple[Cell, str, int]:
        try:
            name, component = _FIELD_LAYOUT[Field(field)]
        except ValueError as e:
            raise AddressingError(f"unknown field {field!r}") from e
        if not 0 <= cell_id < len(self._cells):
            raise AddressingError(f"cell {cell_id} does not exist")
        cell = self._cells[cell_id]
        if not 0 <= slot < cell.count:
            raise AddressingError(f"slot {slot} outside cell {cell_id} ({cell.count})")
        return cell, name, component

    def _count_element(self, rank: int, cell_id: int, write: bool) -> None:
        c = self.counters[rank]
        c.shared_path_calls += 1
        if self._owners[cell_id] == rank:
            if write:
                c.local_element_writes += 1
            else:
                c.local_element_reads += 1
            return
        if write:
            c.remote_element_writes += 1
        else:
            c.remote_element_reads += 1
        if self._crosses_nodes(rank, cell_id):
            c.inter_node_element_accesses += 1

    def element_get(self, rank: int, cell_id: int, slot: int, field) -> float:
        """Read one scalar through the shared path."""
        cell, name, component = self._address(cell_id, slot, field)
        self._count_element(rank, cell_id, write=False)
        return float(getattr(cell, name)[slot, component])

    def element_put(self, rank: int, cell_id: int, slot: int, field, value: float) -> None:
        """Write one scalar through the shared path."""
        cell, name, component = self._address(cell_id, slot, field)
        self.check_write(rank, name)
        self._count_element(rank, cell_id, write=True)
        getattr(cell, name)[slot, component] = value

    def bulk_get(self, rank: int, cell_id: int) -> PrefetchBuffer:
        """Copy all positions of a cell in one transfer."""
        cell = self._cells[cell_id]
        n = cell.count
        c = self.counters[rank]
        c.bulk_gets += 1
        c.bulk_bytes += n * POSITION_RECORD_BYTES
        if self._crosses_nodes(rank, cell_id):
            c.inter_node_transfers += 1
        return PrefetchBuffer(
            cell_id=cell_id,
            positions=cell.positions[:n].copy(),
            forces=np.zeros((n, 3)),
        )

    def bulk_put_forces(self, rank: int, buffer: PrefetchBuffer) -> None:
        """
        Add every accumulated force of the buffer onto its cell in one transfer.

        The caller must hold the cell's lock.

        Raises:
            StalenessError: If the cell's molecule count changed since the fetch.
        """
        cell = self._cells[buffer.cell_id]
        n = cell.count
        if len(buffer) != n:
            raise StalenessError(
                f"buffer for cell {buffer.cell_id} has {len(buffer)} slots, cell holds {n}"
            )
        self.check_write(rank, "forces")
        c = self.counters[rank]
        c.bulk_puts += 1
        c.bulk_bytes += n * FORCE_RECORD_BYTES
        if self._crosses_nodes(rank, buffer.cell_id):
            c.inter_node_transfers += 1
        cell.forces[:n] += buffer.forces

    @contextmanager
    def locked(self, rank: int, *cell_ids: int) -> Iterator[None]:
        """Hold the locks of the given cells, acquired in ascending cell-ID order."""
        acquired: List[threading.Lock] = []
        counters = self.counters[rank]
        try:
            for cell_id in sorted(set(cell_ids)):
                lock = self._cells[cell_id].lock
                lock.acquire()
                acquired.append(lock)
                counters.lock_acquisitions += 1
            yield
        finally:
            for lock in reversed(acquired):
                lock.release()

    # ------------------------------------------------------------------
    # Record transfers (migration)
    # ------------------------------------------------------------------
    def take_records(self, rank: int, cell_id: int, rows: np.ndarray) -> MoleculeRecords:
        """Remove slots from an owned cell and return their records."""
        if self._owners[cell_id] != rank:
            raise AffinityError(f"rank {rank} cannot remove molecules from cell {cell_id}")
        return self._cells[cell_id].remove(rows)

    def put_records(self, rank: int, cell_id: int, records: MoleculeRecords) -> None:
        """
        Insert a batch of molecule records under the destination lock.

        A batch into a foreign cell is one bulk transfer; into an owned cell it is
        a sequence of local element writes.

        Raises:
            CapacityError: If the destination cell is full.
        """
        if not len(records):
            return
        self.check_write(rank, "positions")
        with self.locked(rank, cell_id):
            self._cells[cell_id].append(records)
        c = self.counters[rank]
        if self._owners[cell_id] == rank:
            c.local_element_writes += len(records)
            return
        c.bulk_puts += 1
        c.bulk_bytes += len(records) * MOLECULE_RECORD_BYTES
        if self._crosses_nodes(rank, cell_id):
            c.inter_node_transfers += 1

    # ------------------------------------------------------------------
    # Collectives
    # ------------------------------------------------------------------
    def barrier(self, rank: int) -> None:
        self.collectives.barrier(rank)

    def all_reduce_sum(self, rank: int, partial: float) -> float:
        return self.collectives.all_reduce_sum(rank, partial)

    # ------------------------------------------------------------------
    # Whole-space helpers (outside collective programs)
    # ------------------------------------------------------------------
    def snapshot(self) -> CounterSnapshot:
        return snapshot(self.counters)

    def gather_phasespace(self) -> PhaseSpace:
        """Reassemble all partitions into a phasespace ordered by molecule id."""
        records = MoleculeRecords.concat([cell.records() for cell in self._cells]).sorted_by_id()
        return PhaseSpace(
            domain_lengths=self.grid.domain_lengths, molecules=records, capacity=len(records)
        )


def default_capacity(n_molecules: int, cell_count: int, minimum: int, margin: float) -> int:
    """Cell capacity: a margin over the mean occupancy, never below a floor."""
    return max(minimum, math.ceil(margin * n_molecules / max(cell_count, 1)))


def distribute(
    cells: Sequence[MoleculeRecords],
    grid: CellGrid,
    *,
    access_mode: AccessMode = AccessMode.LOCAL_VIEW,
    schedule: Schedule = Schedule.LOCKSTEP,
    node_size: Optional[int] = None,
    capacity: Optional[int] = None,
    barrier_timeout: float = 600.0,
) -> SharedSpace:
    """
    Place per-cell molecule records into the partition of each cell's owner.

    Raises:
        CapacityError: If a cell holds more molecules than the capacity.
    """
    if len(cells) != grid.cell_count:
        raise AddressingError(f"expected {grid.cell_count} cell lists, got {len(cells)}")
    if capacity is None:
        capacity = default_capacity(sum(len(c) for c in cells), grid.cell_count, 32, 4.0)
    partitions: List[Dict[int, Cell]] = [{} for _ in range(grid.ranks)]
    for cell_id, records in enumerate(cells):
        cell = Cell(cell_id, capacity)
        cell.append(records)
        partitions[grid.owners[cell_id]][cell_id] = cell
    logger.debug(
        f"Distributed {grid.cell_count} cells over {grid.ranks} ranks "
        f"({grid.distribution}, capacity {capacity})"
    )
    return SharedSpace(
        grid,
        partitions,
        access_mode=access_mode,
        collectives=Collectives(grid.ranks, schedule, barrier_timeout),
        node_size=node_size,
    )
