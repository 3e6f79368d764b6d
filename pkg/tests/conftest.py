"""
Shared fixtures for unit and integration tests.
"""
from typing import Callable, Optional, Sequence

import numpy as np
import pytest

from src.config.settings import Settings
from src.core.phasespace import (
    Molecule,
    PhaseSpace,
    grid_generator,
    lattice_side,
    phasespace_init,
)
from src.models import SimConfig, load_config
from src.pgas.shared_space import SharedSpace
from src.simulation import build_space


@pytest.fixture
def settings(tmp_path) -> Settings:
    """Settings isolated from any .env file, writing results under tmp_path."""
    return Settings(
        _env_file=None,
        results_dir=str(tmp_path / "results"),
        session_log_dir=None,
        barrier_timeout_s=120.0,
    )


@pytest.fixture
def make_config() -> Callable[..., SimConfig]:
    """Validated SimConfig from keyword overrides."""
    def _make(**overrides) -> SimConfig:
        return load_config(overrides)
    return _make


@pytest.fixture
def lattice_phasespace() -> Callable[..., PhaseSpace]:
    """
    Generated lattice, optionally jittered by up to ``jitter`` lattice spacings
    per component (jitter < 0.5 keeps every molecule inside its own sub-box).
    """
    def _make(config: SimConfig, jitter: float = 0.0, seed: int = 7) -> PhaseSpace:
        ps = grid_generator(phasespace_init(config), config)
        if jitter:
            spacing = ps.domain_lengths / lattice_side(config)
            rng = np.random.default_rng(seed)
            offsets = rng.uniform(-jitter, jitter, size=ps.molecules.positions.shape)
            ps.molecules.positions = ps.molecules.positions + offsets * spacing
        return ps
    return _make


@pytest.fixture
def molecules_phasespace() -> Callable[..., PhaseSpace]:
    """Hand-made phasespace from (position[, velocity[, force]]) tuples."""
    def _make(config: SimConfig, specs: Sequence[tuple]) -> PhaseSpace:
        mols = [Molecule(i, *spec) for i, spec in enumerate(specs)]
        return PhaseSpace.from_molecules(mols, config.domain_lengths)
    return _make


# Five molecules in cell 0 and one in cell 63 of a 4x4x4 grid
SMALL_SYSTEM = [((0.5 + 0.4 * i, 0.5, 0.5),) for i in range(5)] + [((10.5, 10.5, 10.5),)]


@pytest.fixture
def space_factory(make_config, molecules_phasespace, settings) -> Callable[..., SharedSpace]:
    """Distributed shared space over a hand-made system (SMALL_SYSTEM by default)."""
    def _make(ranks: int = 2, specs: Optional[Sequence[tuple]] = None, **overrides) -> SharedSpace:
        config = make_config(ranks=ranks, **overrides)
        ps = molecules_phasespace(config, SMALL_SYSTEM if specs is None else specs)
        return build_space(config, ps, settings)
    return _make
