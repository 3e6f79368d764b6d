"""
Cell decomposition of the periodic domain.

Cells are numbered row-major, ``id = i*ny*nz + j*nz + k``. With the BLOCKED
distribution consecutive IDs go to the same rank, which makes every rank own a
slab of the domain; ROUND_ROBIN deals IDs out one at a time.
"""
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Tuple

import numpy as np

from src.core.phasespace import MoleculeRecords, PhaseSpace
from src.errors import ContainmentError, GridDomainError
from src.models import Distribution, SimConfig

# Offsets of the 26-neighbourhood that are lexicographically positive
FORWARD_OFFSETS: Tuple[Tuple[int, int, int], ...] = tuple(
    o for o in itertools.product((-1, 0, 1), repeat=3) if o > (0, 0, 0)
)


class CellIndex(NamedTuple):
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class CellGrid:
    """Immutable description of the cell grid and its distribution over ranks."""
    dims: Tuple[int, int, int]
    cell_edge: float
    distribution: Distribution = Distribution.BLOCKED
    ranks: int = 1

    @classmethod
    def from_config(cls, config: SimConfig) -> "CellGrid":
        return cls(
            dims=tuple(config.grid_dims),
            cell_edge=config.cell_edge,
            distribution=config.distribution,
            ranks=config.ranks,
        )

    @property
    def cell_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def domain_lengths(self) -> np.ndarray:
        return np.array(self.dims, dtype=float) * self.cell_edge

    @property
    def block_size(self) -> int:
        return math.ceil(self.cell_count / self.ranks)

    @cached_property
    def owners(self) -> Tuple[int, ...]:
        return tuple(owner_of_cell(c, self) for c in range(self.cell_count))

    @cached_property
    def forward_ids(self) -> Tuple[Tuple[int, ...], ...]:
        """Forward-neighbour IDs of every cell, in stencil order."""
        return tuple(
            tuple(
                cell_id_of_index(n, self)
                for n in forward_neighbors(index_of_cell_id(c, self), self)
            )
            for c in range(self.cell_count)
        )

    def cells_of_rank(self, rank: int) -> List[int]:
        return [c for c, owner in enumerate(self.owners) if owner == rank]


def _check_index(idx: CellIndex, grid: CellGrid) -> None:
    if not all(0 <= c < n for c, n in zip(idx, grid.dims)):
        raise GridDomainError(f"cell index {tuple(idx)} outside grid {grid.dims}")


def cell_id_of_index(idx: CellIndex, grid: CellGrid) -> int:
    """Row-major cell ID of a cell index."""
    _check_index(idx, grid)
    _, ny, nz = grid.dims
    i, j, k = idx
    return i * ny * nz + j * nz + k


def index_of_cell_id(cell_id: int, grid: CellGrid) -> CellIndex:
    """Inverse of cell_id_of_index."""
    if not 0 <= cell_id < grid.cell_count:
        raise GridDomainError(f"cell id {cell_id} outside [0, {grid.cell_count})")
    _, ny, nz = grid.dims
    i, rest = divmod(cell_id, ny * nz)
    j, k = divmod(rest, nz)
    return CellIndex(i, j, k)


def owner_of_cell(cell_id: int, grid: CellGrid) -> int:
    """Rank owning a cell under the grid's distribution policy."""
    if not 0 <= cell_id < grid.cell_count:
        raise GridDomainError(f"cell id {cell_id} outside [0, {grid.cell_count})")
    if grid.distribution is Distribution.ROUND_ROBIN:
        return cell_id % grid.ranks
    return cell_id // grid.block_size


def _shift(idx: CellIndex, offset: Tuple[int, int, int], grid: CellGrid) -> CellIndex:
    return CellIndex(*((c + o) % n for c, o, n in zip(idx, offset, grid.dims)))


def forward_neighbors(idx: CellIndex, grid: CellGrid) -> List[CellIndex]:
    """
    Half stencil: the neighbours this cell interacts with on behalf of both cells.

    For grids with every dimension >= 3 these are the 13 lexicographically positive
    offsets. On smaller grids periodic wrap makes offsets alias; a neighbour is kept
    once, and when two cells reach each other through positive offsets the lower
    ID keeps the pair.
    """
    _check_index(idx, grid)
    own_id = cell_id_of_index(idx, grid)
    result: List[CellIndex] = []
    seen = set()
    for offset in FORWARD_OFFSETS:
        n = _shift(idx, offset, grid)
        n_id = cell_id_of_index(n, grid)
        if n_id == own_id or n_id in seen:
            continue
        reaches_back = any(_shift(n, o, grid) == idx for o in FORWARD_OFFSETS)
        if reaches_back and n_id < own_id:
            continue
        seen.add(n_id)
        result.append(n)
    return result


def cell_ids_of_positions(positions: np.ndarray, grid: CellGrid) -> np.ndarray:
    """
    Vectorized position -> cell ID; a coordinate on an upper face belongs to the next cell.

    Raises:
        ContainmentError: If any position lies outside [0, L) in some dimension.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    lengths = grid.domain_lengths
    outside = (positions < 0.0) | (positions >= lengths)
    if outside.any():
        row = int(np.argwhere(outside.any(axis=1))[0, 0])
        raise ContainmentError(
            f"position {positions[row].tolist()} outside domain {lengths.tolist()}"
        )
    dims = np.array(grid.dims)
    idx = np.minimum(np.floor(positions / grid.cell_edge).astype(np.int64), dims - 1)
    _, ny, nz = grid.dims
    return idx[:, 0] * ny * nz + idx[:, 1] * nz + idx[:, 2]


def assign_molecules_to_cells(phasespace: PhaseSpace, grid: CellGrid) -> List[MoleculeRecords]:
    """Split the phasespace into per-cell molecule records, indexed by cell ID."""
    records = phasespace.molecules
    cell_ids = cell_ids_of_positions(records.positions, grid)
    order = np.argsort(cell_ids, kind="stable")
    bounds = np.searchsorted(cell_ids[order], np.arange(grid.cell_count + 1))
    return [records.take(order[bounds[c]:bounds[c + 1]]) for c in range(grid.cell_count)]


def remote_pair_count(grid: CellGrid) -> int:
    """Number of forward cell pairs whose two cells have different owners."""
    owners = grid.owners
    return sum(
        1
        for c, neighbours in enumerate(grid.forward_ids)
        for n in neighbours
        if owners[c] != owners[n]
    )
