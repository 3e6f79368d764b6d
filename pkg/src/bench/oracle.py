"""
All-pairs verification oracle.

Every molecule pair is evaluated under minimum image with the same truncation
and shift rules as the linked-cell engine, and the engine's forces under each
strategy are compared against the result.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from src.config.settings import Settings, get_settings
from src.core.phasespace import PhaseSpace, grid_generator, lattice_side, phasespace_init
from src.errors import OracleLimitError, SingularityError
from src.interaction.lj import cutoff_energy, minimum_image
from src.models import LjParams, OracleReport, SimConfig, Strategy, StrategyDeviation, load_config
from src.simulation import evaluate_forces

logger = logging.getLogger(__name__)

FORCE_TOLERANCE = 1e-10
POTENTIAL_TOLERANCE = 1e-12
NET_FORCE_TOLERANCE = 1e-9

# Rows per block of the N x N distance evaluation
_CHUNK = 256


@dataclass
class OracleForces:
    ids: np.ndarray
    forces: np.ndarray
    potential: float
    # largest single pair-force magnitude in the sum
    pair_force_scale: float = 0.0


def all_pairs_forces(phasespace: PhaseSpace, params: LjParams) -> OracleForces:
    """
    Forces and total potential by direct summation over all pairs, rows in id order.

    Raises:
        SingularityError: If two molecules coincide.
    """
    records = phasespace.molecules.sorted_by_id()
    pos = records.positions
    box = np.asarray(phasespace.domain_lengths, dtype=float)
    n = len(pos)
    rc2 = params.cutoff**2
    shift = cutoff_energy(params) if params.shift_potential else 0.0

    forces = np.zeros((n, 3))
    potential = 0.0
    pair_scale = 0.0
    for start in range(0, n, _CHUNK):
        rows = np.arange(start, min(start + _CHUNK, n))
        d = minimum_image(pos[None, :, :] - pos[rows, None, :], box)
        r2 = np.einsum("ijk,ijk->ij", d, d)
        mask = r2 < rc2
        mask[np.arange(len(rows)), rows] = False
        if np.any(r2[mask] == 0.0):
            raise SingularityError("overlapping molecules (r = 0)")
        s2 = np.divide(params.sigma**2, r2, out=np.zeros_like(r2), where=mask)
        s6 = s2**3
        s12 = s6 * s6
        fscal = np.where(mask, 24.0 * params.epsilon * (2.0 * s12 - s6) * s2 / params.sigma**2, 0.0)
        forces[rows] = -np.einsum("ij,ijk->ik", fscal, d)
        if np.any(mask):
            pair_scale = max(pair_scale, float(np.max(np.abs(fscal[mask]) * np.sqrt(r2[mask]))))
        # each pair is seen from both sides
        u = np.where(mask, 4.0 * params.epsilon * (s12 - s6) - shift, 0.0)
        potential += 0.5 * float(u.sum())
    return OracleForces(
        ids=records.ids, forces=forces, potential=potential, pair_force_scale=pair_scale
    )


def _relative(deviation: float, scale: float) -> float:
    return deviation / scale if scale > 0.0 else deviation


def force_scale(oracle: OracleForces, params: LjParams) -> float:
    """
    Reference magnitude for force deviations.

    Net forces cancel on symmetric lattices, leaving max|F| at round-off level, so
    the scale never drops below the largest pair force of the sum (or 24 eps/sigma
    when no pair interacts).
    """
    floor = oracle.pair_force_scale or 24.0 * params.epsilon / params.sigma
    return max(float(np.max(np.abs(oracle.forces), initial=0.0)), floor)


def compare_strategy(
    config: SimConfig,
    phasespace: PhaseSpace,
    oracle: OracleForces,
    strategy: Strategy,
    settings: Optional[Settings] = None,
) -> StrategyDeviation:
    """Run one linked-cell sweep and measure it against the oracle."""
    result = evaluate_forces(config, phasespace, strategy, settings)
    force_dev = _relative(
        float(np.max(np.abs(result.forces - oracle.forces), initial=0.0)),
        force_scale(oracle, config.lj),
    )
    potential_dev = _relative(abs(result.potential - oracle.potential), abs(oracle.potential))
    net: Tuple[float, float, float] = tuple(float(c) for c in result.forces.sum(axis=0))
    passed = (
        force_dev < FORCE_TOLERANCE
        and potential_dev < POTENTIAL_TOLERANCE
        and all(abs(c) < NET_FORCE_TOLERANCE for c in net)
    )
    logger.info(
        f"{strategy}: force deviation {force_dev:.3e}, potential deviation "
        f"{potential_dev:.3e}, net force {max(abs(c) for c in net):.3e}"
    )
    return StrategyDeviation(
        strategy=strategy,
        potential=result.potential,
        max_force_deviation=force_dev,
        potential_deviation=potential_dev,
        net_force=net,
        passed=passed,
    )


def oracle_check(
    config: SimConfig,
    phasespace: Optional[PhaseSpace] = None,
    strategies: Iterable[Strategy] = tuple(Strategy),
    settings: Optional[Settings] = None,
) -> OracleReport:
    """
    Compare the linked-cell engine under each strategy with all-pairs summation.

    Raises:
        OracleLimitError: If the system exceeds ``oracle_max_molecules``.
    """
    config = load_config(config)
    settings = settings or get_settings()
    n = len(phasespace) if phasespace is not None else lattice_side(config) ** 3
    if n > settings.oracle_max_molecules:
        raise OracleLimitError(
            f"{n} molecules exceed the all-pairs limit of {settings.oracle_max_molecules}; "
            f"lower the density or the grid size, or raise ORACLE_MAX_MOLECULES"
        )
    if phasespace is None:
        phasespace = grid_generator(phasespace_init(config), config)

    oracle = all_pairs_forces(phasespace, config.lj)
    report = OracleReport(
        n_molecules=len(phasespace),
        oracle_potential=oracle.potential,
        force_tolerance=FORCE_TOLERANCE,
        potential_tolerance=POTENTIAL_TOLERANCE,
    )
    for strategy in strategies:
        strategy = Strategy(strategy)
        report.strategies[str(strategy)] = compare_strategy(
            config, phasespace, oracle, strategy, settings
        )
    return report
