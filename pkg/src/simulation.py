"""
Main simulation loop.

A controller thread builds the shared space and spawns one thread per rank; every
rank runs the same phase program:

    zero -> sweep -> observe(0)
    per step: kick(dt/2) -> drift(dt) -> migrate -> zero -> sweep -> kick(dt/2) -> observe

with barriers between phases. Kinetic and potential energy are reduced with
all_reduce_sum, so every rank sees the same observables.
"""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.config.settings import Settings, get_settings
from src.core.cell_grid import CellGrid, assign_molecules_to_cells
from src.core.phasespace import PhaseSpace, grid_generator, phasespace_init
from src.errors import CollectiveAbortedError, ConfigurationError, EngineError, StepFailedError
from src.integrator import drift, kick, migrate
from src.interaction.strategies import force_sweep
from src.models import CounterSnapshot, SimConfig, StepObservables, Strategy, load_config
from src.pgas.access import read_block, zero_cell_forces
from src.pgas.executor import run_ranks
from src.pgas.shared_space import Phase, SharedSpace, default_capacity, distribute

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Everything a finished run produced."""
    config: SimConfig
    observables: List[StepObservables]
    counters: CounterSnapshot
    wall_time_s: float
    phasespace: PhaseSpace


@dataclass
class ForceEvaluation:
    """Forces of a single sweep, rows ordered by molecule id."""
    ids: np.ndarray
    forces: np.ndarray
    potential: float
    counters: CounterSnapshot


def zero_forces(rank: int, space: SharedSpace) -> None:
    """Set every force component of the rank's molecules to exactly 0."""
    space.enter_phase(rank, Phase.ZERO)
    for cell_id in space.owned_cells(rank):
        zero_cell_forces(rank, cell_id, space)


def build_space(
    config: SimConfig, phasespace: PhaseSpace, settings: Optional[Settings] = None
) -> SharedSpace:
    """
    Bin the phasespace into cells and distribute them over the ranks.

    Raises:
        ConfigurationError: If the phasespace domain differs from the configured one.
        ContainmentError: If a molecule lies outside the domain.
    """
    settings = settings or get_settings()
    expected = np.asarray(config.domain_lengths, dtype=float)
    if not np.array_equal(phasespace.domain_lengths, expected):
        raise ConfigurationError(
            f"phasespace domain {phasespace.domain_lengths.tolist()} does not match "
            f"the configured domain {list(config.domain_lengths)}"
        )
    grid = CellGrid.from_config(config)
    cells = assign_molecules_to_cells(phasespace, grid)
    capacity = default_capacity(
        len(phasespace), grid.cell_count, settings.min_cell_capacity, settings.cell_capacity_margin
    )
    capacity = max(capacity, max((len(c) for c in cells), default=0))
    return distribute(
        cells,
        grid,
        access_mode=config.access_mode,
        schedule=config.schedule,
        node_size=config.node_size,
        capacity=capacity,
        barrier_timeout=settings.barrier_timeout_s,
    )


def _observe(rank: int, step: int, potential: float, n: int, space: SharedSpace) -> StepObservables:
    space.enter_phase(rank, Phase.OBSERVE)
    kinetic = 0.0
    for cell_id in space.owned_cells(rank):
        if space.cell_size(cell_id):
            v = read_block(rank, cell_id, "velocities", space)
            kinetic += 0.5 * float(np.sum(v * v))
    kinetic = space.all_reduce_sum(rank, kinetic)
    potential = space.all_reduce_sum(rank, potential)
    return StepObservables(
        step=step,
        kinetic=kinetic,
        potential=potential,
        total=kinetic + potential,
        temperature=2.0 * kinetic / (3.0 * n) if n else 0.0,
    )


def _initial_phasespace(config: SimConfig) -> PhaseSpace:
    return grid_generator(phasespace_init(config), config)


def run(
    config: SimConfig,
    phasespace: Optional[PhaseSpace] = None,
    settings: Optional[Settings] = None,
) -> RunResult:
    """
    Run a full simulation.

    Without an injected phasespace the lattice generator builds one from the config.
    Observables are recorded at step 0, every ``observable_stride`` steps and at the
    last step.

    Raises:
        ConfigurationError: For invalid parameters.
        StepFailedError: If a time step fails (step 0 is the initial force evaluation);
            ``cause`` holds the engine error.
    """
    config = load_config(config)
    if phasespace is None:
        phasespace = _initial_phasespace(config)
    space = build_space(config, phasespace, settings)
    n = len(phasespace)
    dt = config.dt
    params = config.lj
    logger.info(
        f"Running {config.steps} steps: {n} molecules, grid {config.grid_dims}, "
        f"{config.ranks} ranks, {config.strategy}, {config.distribution}, "
        f"{config.access_mode}, {config.schedule}"
    )

    def program(rank: int) -> List[StepObservables]:
        recorded: List[StepObservables] = []
        try:
            zero_forces(rank, space)
            space.barrier(rank)
            potential = force_sweep(rank, config.strategy, space, params)
            recorded.append(_observe(rank, 0, potential, n, space))
        except CollectiveAbortedError:
            raise
        except EngineError as e:
            raise StepFailedError(0, e) from e
        for step in range(1, config.steps + 1):
            try:
                kick(rank, space, 0.5 * dt)
                space.barrier(rank)
                drift(rank, space, dt)
                space.barrier(rank)
                migrate(rank, space)
                zero_forces(rank, space)
                space.barrier(rank)
                potential = force_sweep(rank, config.strategy, space, params)
                kick(rank, space, 0.5 * dt)
                space.barrier(rank)
                if step % config.observable_stride == 0 or step == config.steps:
                    obs = _observe(rank, step, potential, n, space)
                    recorded.append(obs)
                    if rank == 0:
                        logger.debug(
                            f"step {step}: K={obs.kinetic:.6f} U={obs.potential:.6f} "
                            f"E={obs.total:.6f} T={obs.temperature:.4f}"
                        )
            except CollectiveAbortedError:
                raise
            except EngineError as e:
                raise StepFailedError(step, e) from e
        return recorded

    start = time.perf_counter()
    try:
        per_rank = run_ranks(space, program)
    except StepFailedError as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        raise
    wall = time.perf_counter() - start

    logger.info(f"Finished {config.steps} steps in {wall:.3f}s")
    return RunResult(
        config=config,
        observables=per_rank[0],
        counters=space.snapshot(),
        wall_time_s=wall,
        phasespace=space.gather_phasespace(),
    )


def evaluate_forces(
    config: SimConfig,
    phasespace: PhaseSpace,
    strategy: Optional[Strategy] = None,
    settings: Optional[Settings] = None,
) -> ForceEvaluation:
    """
    One collective zero + force sweep + potential reduction on a given phasespace.

    Counters cover the zeroing and the sweep only.
    """
    config = load_config(config)
    if strategy is not None:
        config = config.model_copy(update={"strategy": Strategy(strategy)})
    space = build_space(config, phasespace, settings)

    def program(rank: int) -> float:
        zero_forces(rank, space)
        space.barrier(rank)
        potential = force_sweep(rank, config.strategy, space, config.lj)
        return space.all_reduce_sum(rank, potential)

    potentials = run_ranks(space, program)
    gathered = space.gather_phasespace()
    return ForceEvaluation(
        ids=gathered.molecules.ids,
        forces=gathered.molecules.forces,
        potential=potentials[0],
        counters=space.snapshot(),
    )
