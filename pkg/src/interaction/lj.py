"""
Lennard-Jones 12-6 pair interaction.

u(r) = 4 eps [(sigma/r)^12 - (sigma/r)^6], truncated at the cut-off (strictly r < rc)
and optionally shifted by u(rc). Displacements point from molecule a to molecule b,
so the force on a is -(24 eps / r^2) [2 (sigma/r)^12 - (sigma/r)^6] * r_vec.
"""
from dataclasses import dataclass

import numpy as np

from src.errors import SingularityError
from src.models import LjParams


@dataclass(frozen=True)
class PairResult:
    force_on_a: np.ndarray
    potential: float

    @property
    def force_on_b(self) -> np.ndarray:
        return -self.force_on_a


def cutoff_energy(params: LjParams) -> float:
    """u(rc), the shift applied when shift_potential is on."""
    s6 = (params.sigma / params.cutoff) ** 6
    return 4.0 * params.epsilon * (s6 * s6 - s6)


def lj_pair(r_vec, params: LjParams) -> PairResult:
    """Force on a and pair potential for the displacement a -> b."""
    r_vec = np.asarray(r_vec, dtype=float)
    r2 = float(r_vec @ r_vec)
    if r2 == 0.0:
        raise SingularityError("overlapping molecules (r = 0)")
    if r2 >= params.cutoff**2:
        return PairResult(force_on_a=np.zeros(3), potential=0.0)
    s2 = params.sigma**2 / r2
    s6 = s2**3
    s12 = s6 * s6
    potential = 4.0 * params.epsilon * (s12 - s6)
    if params.shift_potential:
        potential -= cutoff_energy(params)
    fscal = 24.0 * params.epsilon * (2.0 * s12 - s6) / r2
    return PairResult(force_on_a=-fscal * r_vec, potential=potential)


def minimum_image(d: np.ndarray, box: np.ndarray) -> np.ndarray:
    """Displacements folded to the nearest periodic image."""
    return d - box * np.rint(d / box)


@dataclass
class BlockResult:
    """All in-cutoff pairs between two molecule blocks."""
    rows: np.ndarray          # index into block a
    cols: np.ndarray          # index into block b
    pair_forces: np.ndarray   # force on a for each pair, (k, 3)
    force_on_a: np.ndarray    # summed per molecule of a, (na, 3)
    force_on_b: np.ndarray    # summed per molecule of b, (nb, 3)
    potential: float

    @property
    def interactions(self) -> int:
        return len(self.rows)

    @classmethod
    def empty(cls, na: int, nb: int) -> "BlockResult":
        return cls(
            rows=np.empty(0, dtype=np.intp),
            cols=np.empty(0, dtype=np.intp),
            pair_forces=np.empty((0, 3)),
            force_on_a=np.zeros((na, 3)),
            force_on_b=np.zeros((nb, 3)),
            potential=0.0,
        )


def lj_block(
    pos_a: np.ndarray,
    pos_b: np.ndarray,
    box: np.ndarray,
    params: LjParams,
    same_cell: bool = False,
) -> BlockResult:
    """
    Evaluate every pair between two blocks under minimum image.

    With ``same_cell`` both blocks are the same molecules and only pairs i < j
    are counted.

    Raises:
        SingularityError: If two distinct molecules coincide.
    """
    na, nb = len(pos_a), len(pos_b)
    if na == 0 or nb == 0:
        return BlockResult.empty(na, nb)

    d = minimum_image(pos_b[None, :, :] - pos_a[:, None, :], box)
    r2 = np.einsum("ijk,ijk->ij", d, d)
    mask = r2 < params.cutoff**2
    if same_cell:
        mask &= ~np.tri(na, nb, 0, dtype=bool)
    if np.any(r2[mask] == 0.0):
        raise SingularityError("overlapping molecules (r = 0)")

    rows, cols = np.nonzero(mask)
    r2m = r2[rows, cols]
    s2 = params.sigma**2 / r2m
    s6 = s2**3
    s12 = s6 * s6
    u = 4.0 * params.epsilon * (s12 - s6)
    if params.shift_potential:
        u = u - cutoff_energy(params)
    fscal = 24.0 * params.epsilon * (2.0 * s12 - s6) / r2m
    pair_forces = -fscal[:, None] * d[rows, cols]

    f = np.zeros((na, nb, 3))
    f[rows, cols] = pair_forces
    return BlockResult(
        rows=rows,
        cols=cols,
        pair_forces=pair_forces,
        force_on_a=f.sum(axis=1),
        force_on_b=-f.sum(axis=0),
        potential=float(u.sum()),
    )
