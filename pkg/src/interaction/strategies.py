"""
Cell-pair interaction strategies and the force sweep.

LPM   takes the locks of both written cells for every interacting molecule pair.
LPC   takes both cell locks once per cell pair.
LPC+  is LPC, except that a remote neighbour is prefetched with one bulk get and
      its forces are merged back with one bulk put.

Locks are always taken in ascending cell-ID order. Positions are frozen during the
force phase, so they are read without locks.
"""
import logging
from typing import Callable, Dict, Optional

import numpy as np

from src.interaction.lj import BlockResult, lj_block
from src.models import LjParams, Strategy
from src.pgas.access import element_add_force, has_local_path, read_block
from src.pgas.shared_space import LocalView, Phase, SharedSpace

logger = logging.getLogger(__name__)

CellPairKernel = Callable[[int, int, int, SharedSpace, LjParams], float]


def _view(rank: int, cell_id: int, space: SharedSpace) -> Optional[LocalView]:
    return space.local_view(rank, cell_id) if has_local_path(rank, cell_id, space) else None


def _add_one(
    rank: int, cell_id: int, slot: int, force: np.ndarray,
    view: Optional[LocalView], space: SharedSpace,
) -> None:
    if view is not None:
        view.add_force(slot, force)
    else:
        element_add_force(rank, cell_id, slot, force, space)


def _evaluate(
    rank: int, cell_a: int, cell_b: int, space: SharedSpace, params: LjParams
) -> BlockResult:
    pos_a = read_block(rank, cell_a, "positions", space)
    if cell_a == cell_b:
        return lj_block(pos_a, pos_a, space.box, params, same_cell=True)
    pos_b = read_block(rank, cell_b, "positions", space)
    return lj_block(pos_a, pos_b, space.box, params)


def _write_forces(
    rank: int, cell_a: int, cell_b: int, block: BlockResult, space: SharedSpace
) -> None:
    """
    Write both sides of a cell pair.

    A side reachable through a local view receives one aggregated add per molecule;
    a side on the shared path receives one read-modify-write per interacting pair.
    """
    view_a = _view(rank, cell_a, space)
    if cell_a == cell_b:
        view_b = view_a
    else:
        view_b = _view(rank, cell_b, space)

    if view_a is not None:
        view_a.add_forces(block.force_on_a)
    if view_b is not None:
        view_b.add_forces(block.force_on_b)
    if view_a is not None and view_b is not None:
        return

    for i, j, f in zip(block.rows.tolist(), block.cols.tolist(), block.pair_forces):
        if view_a is None:
            element_add_force(rank, cell_a, i, f, space)
        if view_b is None:
            element_add_force(rank, cell_b, j, -f, space)


def cell_pair_lpm(
    rank: int, cell_a: int, cell_b: int, space: SharedSpace, params: LjParams
) -> float:
    """Lock per molecule interaction: both cells are locked for each in-cutoff pair."""
    block = _evaluate(rank, cell_a, cell_b, space, params)
    if not block.interactions:
        return block.potential
    view_a = _view(rank, cell_a, space)
    view_b = view_a if cell_a == cell_b else _view(rank, cell_b, space)
    for i, j, f in zip(block.rows.tolist(), block.cols.tolist(), block.pair_forces):
        with space.locked(rank, cell_a, cell_b):
            _add_one(rank, cell_a, i, f, view_a, space)
            _add_one(rank, cell_b, j, -f, view_b, space)
    return block.potential


def cell_pair_lpc(
    rank: int, cell_a: int, cell_b: int, space: SharedSpace, params: LjParams
) -> float:
    """Lock per cell interaction: both cells are locked once for the whole pair."""
    block = _evaluate(rank, cell_a, cell_b, space, params)
    with space.locked(rank, cell_a, cell_b):
        _write_forces(rank, cell_a, cell_b, block, space)
    return block.potential


def cell_pair_lpc_plus(
    rank: int, cell_a: int, cell_b: int, space: SharedSpace, params: LjParams
) -> float:
    """
    Lock per cell with prefetching and copy-at-once.

    A remote neighbour's positions arrive in one bulk get; its force contributions
    are accumulated privately and merged with one bulk put under its lock. The put
    is skipped when nothing interacted.
    """
    if space.affinity(cell_b) == rank:
        return cell_pair_lpc(rank, cell_a, cell_b, space, params)

    buffer = space.bulk_get(rank, cell_b)
    pos_a = read_block(rank, cell_a, "positions", space)
    block = lj_block(pos_a, buffer.positions, space.box, params)

    with space.locked(rank, cell_a):
        view_a = _view(rank, cell_a, space)
        if view_a is not None:
            view_a.add_forces(block.force_on_a)
        else:
            for i, f in zip(block.rows.tolist(), block.pair_forces):
                element_add_force(rank, cell_a, i, f, space)

    if block.interactions:
        buffer.forces += block.force_on_b
        with space.locked(rank, cell_b):
            space.bulk_put_forces(rank, buffer)
    return block.potential


KERNELS: Dict[Strategy, CellPairKernel] = {
    Strategy.LPM: cell_pair_lpm,
    Strategy.LPC: cell_pair_lpc,
    Strategy.LPC_PLUS: cell_pair_lpc_plus,
}


def force_sweep(rank: int, strategy: Strategy, space: SharedSpace, params: LjParams) -> float:
    """
    Interactions of every owned cell with itself and its forward neighbours.

    Collective: ends with a barrier, after which every force is complete.
    Returns the sum of the pair potentials evaluated by this rank.
    """
    space.enter_phase(rank, Phase.FORCE)
    kernel = KERNELS[Strategy(strategy)]
    forward_ids = space.grid.forward_ids
    potential = 0.0
    for cell_id in space.owned_cells(rank):
        potential += kernel(rank, cell_id, cell_id, space, params)
        for neighbour in forward_ids[cell_id]:
            potential += kernel(rank, cell_id, neighbour, space, params)
    space.barrier(rank)
    return potential
