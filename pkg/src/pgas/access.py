"""
Access-path selection for whole-cell reads and writes.

An owner in the LOCAL_VIEW access mode goes through a local view; everything else
goes element by element through the shared path.
"""
from typing import Sequence

import numpy as np

from src.models import AccessMode
from src.pgas.shared_space import (
    FORCE_FIELDS,
    POSITION_FIELDS,
    VELOCITY_FIELDS,
    SharedSpace,
)

_FIELDS = {
    "positions": POSITION_FIELDS,
    "velocities": VELOCITY_FIELDS,
    "forces": FORCE_FIELDS,
}


def has_local_path(rank: int, cell_id: int, space: SharedSpace) -> bool:
    return space.access_mode is AccessMode.LOCAL_VIEW and space.affinity(cell_id) == rank


def read_block(rank: int, cell_id: int, kind: str, space: SharedSpace) -> np.ndarray:
    """All records of one kind ('positions', 'velocities', 'forces') of a cell."""
    if has_local_path(rank, cell_id, space):
        view = space.local_view(rank, cell_id)
        return getattr(view, kind)()
    fields = _FIELDS[kind]
    n = space.cell_size(cell_id)
    out = np.empty((n, 3))
    for slot in range(n):
        for c, field in enumerate(fields):
            out[slot, c] = space.element_get(rank, cell_id, slot, field)
    return out


def write_block(
    rank: int, cell_id: int, kind: str, values: np.ndarray, space: SharedSpace
) -> None:
    """Overwrite the positions or velocities of a cell."""
    if has_local_path(rank, cell_id, space):
        view = space.local_view(rank, cell_id)
        if kind == "positions":
            view.set_positions(values)
        else:
            view.set_velocities(values)
        return
    fields = _FIELDS[kind]
    for slot in range(space.cell_size(cell_id)):
        for c, field in enumerate(fields):
            space.element_put(rank, cell_id, slot, field, float(values[slot, c]))


def element_add_force(
    rank: int, cell_id: int, slot: int, force: Sequence[float], space: SharedSpace
) -> None:
    """Read-modify-write of one molecule's force, component by component."""
    for field, delta in zip(FORCE_FIELDS, force):
        current = space.element_get(rank, cell_id, slot, field)
        space.element_put(rank, cell_id, slot, field, current + float(delta))


def zero_cell_forces(rank: int, cell_id: int, space: SharedSpace) -> None:
    if has_local_path(rank, cell_id, space):
        space.local_view(rank, cell_id).zero_forces()
        return
    for slot in range(space.cell_size(cell_id)):
        for field in FORCE_FIELDS:
            space.element_put(rank, cell_id, slot, field, 0.0)
