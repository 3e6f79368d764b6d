"""
Molecule storage, phasespace initialization and the lattice grid generator.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError, GenerationError
from src.models import SimConfig, load_config

logger = logging.getLogger(__name__)

# Lattice spacing below this fraction of sigma is treated as unphysical overlap
MIN_SPACING_SIGMA = 0.5


@dataclass(frozen=True)
class Molecule:
    """A single molecule in reduced Lennard-Jones units."""
    id: int
    position: Tuple[float, float, float]
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    force: Tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass
class MoleculeRecords:
    """Column store of molecule records (ids plus position/velocity/force triples)."""
    ids: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    forces: np.ndarray

    @classmethod
    def empty(cls) -> "MoleculeRecords":
        return cls(
            ids=np.empty(0, dtype=np.int64),
            positions=np.empty((0, 3)),
            velocities=np.empty((0, 3)),
            forces=np.empty((0, 3)),
        )

    @classmethod
    def concat(cls, parts: Sequence["MoleculeRecords"]) -> "MoleculeRecords":
        if not parts:
            return cls.empty()
        return cls(
            ids=np.concatenate([p.ids for p in parts]),
            positions=np.concatenate([p.positions for p in parts]),
            velocities=np.concatenate([p.velocities for p in parts]),
            forces=np.concatenate([p.forces for p in parts]),
        )

    def __len__(self) -> int:
        return len(self.ids)

    def take(self, rows) -> "MoleculeRecords":
        """Copy the selected rows (index array or boolean mask)."""
        return MoleculeRecords(
            ids=self.ids[rows].copy(),
            positions=self.positions[rows].copy(),
            velocities=self.velocities[rows].copy(),
            forces=self.forces[rows].copy(),
        )

    def sorted_by_id(self) -> "MoleculeRecords":
        return self.take(np.argsort(self.ids, kind="stable"))


@dataclass
class PhaseSpace:
    """The system of molecules inside the periodic domain."""
    domain_lengths: np.ndarray
    molecules: MoleculeRecords = field(default_factory=MoleculeRecords.empty)
    capacity: int = 0

    @classmethod
    def from_molecules(
        cls, molecules: Iterable[Molecule], domain_lengths: Sequence[float]
    ) -> "PhaseSpace":
        mols = list(molecules)
        records = MoleculeRecords(
            ids=np.array([m.id for m in mols], dtype=np.int64),
            positions=np.array([m.position for m in mols], dtype=float).reshape(-1, 3),
            velocities=np.array([m.velocity for m in mols], dtype=float).reshape(-1, 3),
            forces=np.array([m.force for m in mols], dtype=float).reshape(-1, 3),
        )
        if len(np.unique(records.ids)) != len(records):
            raise ConfigurationError("molecule ids must be unique")
        return cls(
            domain_lengths=np.asarray(domain_lengths, dtype=float),
            molecules=records,
            capacity=len(records),
        )

    def __len__(self) -> int:
        return len(self.molecules)

    @property
    def volume(self) -> float:
        return float(np.prod(self.domain_lengths))

    def molecule(self, row: int) -> Molecule:
        m = self.molecules
        return Molecule(
            id=int(m.ids[row]),
            position=tuple(float(c) for c in m.positions[row]),
            velocity=tuple(float(c) for c in m.velocities[row]),
            force=tuple(float(c) for c in m.forces[row]),
        )

    def __iter__(self) -> Iterator[Molecule]:
        for row in range(len(self)):
            yield self.molecule(row)


def lattice_side(config: SimConfig) -> int:
    """Largest m with m**3 <= density * volume."""
    target = config.density * float(np.prod(config.domain_lengths))
    m = int(math.floor(target ** (1.0 / 3.0) + 1e-9))
    while m > 0 and m**3 > target * (1 + 1e-12):
        m -= 1
    return m


def phasespace_init(config: SimConfig) -> PhaseSpace:
    """
    Allocate an empty phasespace for the configured domain.

    Raises:
        ConfigurationError: If the configuration violates its invariants.
    """
    config = load_config(config)
    capacity = lattice_side(config) ** 3
    return PhaseSpace(
        domain_lengths=np.array(config.domain_lengths, dtype=float),
        capacity=capacity,
    )


def grid_generator(
    phasespace: PhaseSpace, config: SimConfig, rng: Optional[np.random.Generator] = None
) -> PhaseSpace:
    """
    Place molecules on a simple cubic lattice and draw Maxwell-Boltzmann velocities.

    Sites sit at the centres of an m x m x m subdivision of the domain. Velocities
    are normal with variance T (unit mass), then shifted to zero total momentum.

    Raises:
        GenerationError: If the phasespace is not empty, nothing fits, or the lattice
            spacing falls below half a sigma.
    """
    if len(phasespace):
        raise GenerationError("grid generator needs an empty phasespace")

    m = lattice_side(config)
    if m == 0:
        raise GenerationError(
            f"density {config.density} places no molecule in volume {phasespace.volume}"
        )
    spacing = phasespace.domain_lengths / m
    if spacing.min() < MIN_SPACING_SIGMA * config.lj.sigma:
        raise GenerationError(
            f"lattice spacing {spacing.min():.4f} is below {MIN_SPACING_SIGMA} sigma"
        )

    grid = np.stack(np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij"), -1)
    positions = (grid.reshape(-1, 3) + 0.5) * spacing
    n = len(positions)

    rng = rng if rng is not None else np.random.default_rng(config.seed)
    velocities = rng.normal(0.0, math.sqrt(config.temperature), size=(n, 3))
    velocities -= velocities.mean(axis=0)

    phasespace.molecules = MoleculeRecords(
        ids=np.arange(n, dtype=np.int64),
        positions=positions,
        velocities=velocities,
        forces=np.zeros((n, 3)),
    )
    logger.info(f"Generated {n} molecules on a {m}^3 lattice (spacing {spacing.min():.4f})")
    return phasespace


def kinetic_energy(phasespace: PhaseSpace) -> float:
    """Sum of 1/2 |v|^2 over all molecules (unit mass)."""
    v = phasespace.molecules.velocities
    return 0.5 * float(np.sum(v * v))
