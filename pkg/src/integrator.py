"""
Velocity Verlet time integration and migration of molecules between cells.

``kick`` and ``drift`` only touch the calling rank's own cells. ``migrate`` is
collective and must be called by every rank.
"""
import logging
from typing import List, Tuple

import numpy as np

from src.core.cell_grid import cell_ids_of_positions
from src.core.phasespace import MoleculeRecords
from src.errors import StabilityError
from src.pgas.access import read_block, write_block
from src.pgas.shared_space import Phase, SharedSpace

logger = logging.getLogger(__name__)


def kick(rank: int, space: SharedSpace, dt_half: float) -> None:
    """v += dt_half * f for every owned molecule (unit mass)."""
    space.enter_phase(rank, Phase.KICK)
    for cell_id in space.owned_cells(rank):
        if not space.cell_size(cell_id):
            continue
        velocities = read_block(rank, cell_id, "velocities", space)
        forces = read_block(rank, cell_id, "forces", space)
        write_block(rank, cell_id, "velocities", velocities + dt_half * forces, space)


def wrap_positions(positions: np.ndarray, box: np.ndarray) -> np.ndarray:
    """Fold positions into [0, L) per dimension."""
    wrapped = np.mod(positions, box)
    # mod of a tiny negative value rounds up to L itself
    return np.where(wrapped >= box, 0.0, wrapped)


def drift(rank: int, space: SharedSpace, dt: float) -> None:
    """
    p += dt * v for every owned molecule, then periodic wrap.

    Raises:
        StabilityError: If a displacement reaches one cell edge.
    """
    space.enter_phase(rank, Phase.DRIFT)
    edge = space.grid.cell_edge
    for cell_id in space.owned_cells(rank):
        if not space.cell_size(cell_id):
            continue
        positions = read_block(rank, cell_id, "positions", space)
        displacement = dt * read_block(rank, cell_id, "velocities", space)
        step = np.linalg.norm(displacement, axis=1)
        if np.any(step >= edge):
            slot = int(np.argmax(step))
            raise StabilityError(
                f"molecule in cell {cell_id} slot {slot} moves {step[slot]:.4g} "
                f">= cell edge {edge} in one step; reduce dt"
            )
        wrapped = wrap_positions(positions + displacement, space.box)
        write_block(rank, cell_id, "positions", wrapped, space)


def migrate(rank: int, space: SharedSpace) -> int:
    """
    Move every molecule into the cell its position maps to.

    Collective, in two sub-phases separated by barriers: owners extract leaving
    molecules from their cells, then every rank inserts its batches, one per
    (source cell, destination cell), under the destination lock.

    Returns:
        Number of molecules this rank moved.

    Raises:
        CapacityError: If a destination cell is full.
    """
    space.enter_phase(rank, Phase.MIGRATE)
    outgoing: List[Tuple[int, int, MoleculeRecords]] = []
    for cell_id in space.owned_cells(rank):
        if not space.cell_size(cell_id):
            continue
        positions = read_block(rank, cell_id, "positions", space)
        destinations = cell_ids_of_positions(positions, space.grid)
        leaving = np.flatnonzero(destinations != cell_id)
        if not len(leaving):
            continue
        records = space.take_records(rank, cell_id, leaving)
        targets = destinations[leaving]
        for dest in np.unique(targets).tolist():
            outgoing.append((cell_id, dest, records.take(targets == dest)))
    space.barrier(rank)

    moved = 0
    for _, dest, batch in sorted(outgoing, key=lambda item: item[:2]):
        space.put_records(rank, dest, batch)
        moved += len(batch)
    space.barrier(rank)
    if moved:
        logger.debug(f"Rank {rank} migrated {moved} molecules in {len(outgoing)} batches")
    return moved
