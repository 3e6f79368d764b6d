"""
Strong-scaling sweep: every (strategy, distribution, access mode, ranks)
combination is run ``repetitions`` times on the same base configuration.
"""
import itertools
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from src.config.settings import Settings
from src.errors import EngineError
from src.models import RankCounters, SimConfig, SweepRow, SweepSpec, load_config
from src.services.logger import RunLogger
from src.simulation import run

logger = logging.getLogger(__name__)


def run_label(config: SimConfig) -> str:
    """Short name of a run, as used for session log files."""
    return f"{config.strategy}_{config.distribution}_{config.access_mode}_r{config.ranks}"


def load_sweep_spec(path: Union[str, Path]) -> SweepSpec:
    """Read and validate a JSON sweep specification."""
    return SweepSpec.model_validate_json(Path(path).read_text(encoding="utf-8"))


def _combination_config(
    base: SimConfig, spec: SweepSpec, strategy, distribution, access_mode, ranks: int
) -> SimConfig:
    payload = base.model_dump()
    payload.update(
        strategy=strategy,
        distribution=distribution,
        access_mode=access_mode,
        ranks=ranks,
    )
    if spec.ranks_per_node is not None:
        payload["ranks_per_node"] = spec.ranks_per_node
    return load_config(payload)


def run_combination(
    config: SimConfig,
    repetitions: int,
    settings: Optional[Settings] = None,
    session: Optional[RunLogger] = None,
) -> SweepRow:
    """
    Repeat one configuration and summarize wall time and counter totals.

    Counters are deterministic; a repetition whose totals differ from the first
    is logged as a warning. With a session, every repetition gets its own log file.
    """
    walls: List[float] = []
    totals: Optional[RankCounters] = None
    for rep in range(repetitions):
        result = run(config, settings=settings)
        walls.append(result.wall_time_s)
        if session:
            session.log_run(
                f"{run_label(config)}_rep{rep}",
                result.observables,
                result.counters,
                result.wall_time_s,
            )
        if totals is None:
            totals = result.counters.totals
        elif result.counters.totals != totals:
            logger.warning(
                f"Counters of repetition {rep} differ from repetition 0 for "
                f"{config.strategy}/{config.distribution}/{config.access_mode}/{config.ranks}"
            )
    return SweepRow(
        strategy=config.strategy,
        distribution=config.distribution,
        access_mode=config.access_mode,
        ranks=config.ranks,
        mean_wall_s=float(np.mean(walls)),
        remote_element_reads=totals.remote_element_reads,
        remote_element_writes=totals.remote_element_writes,
        bulk_gets=totals.bulk_gets,
        bulk_puts=totals.bulk_puts,
        bulk_bytes=totals.bulk_bytes,
        lock_acquisitions=totals.lock_acquisitions,
        ranks_per_node=config.node_size,
        std_wall_s=float(np.std(walls, ddof=1)) if len(walls) > 1 else 0.0,
        inter_node_element_accesses=totals.inter_node_element_accesses,
    )


def run_sweep(
    spec: SweepSpec,
    base: SimConfig,
    settings: Optional[Settings] = None,
    repetitions: Optional[int] = None,
    session: Optional[RunLogger] = None,
) -> List[SweepRow]:
    """
    Run every combination of the sweep; a failing combination becomes a failed row.
    """
    base = load_config(base)
    reps = repetitions or spec.repetitions
    combinations = list(
        itertools.product(spec.strategies, spec.distributions, spec.access_modes, spec.rank_counts)
    )
    logger.info(f"Sweep: {len(combinations)} combinations x {reps} repetitions")

    rows: List[SweepRow] = []
    for strategy, distribution, access_mode, ranks in combinations:
        try:
            config = _combination_config(base, spec, strategy, distribution, access_mode, ranks)
            rows.append(run_combination(config, reps, settings, session))
        except EngineError as e:
            logger.warning(
                f"Sweep row {strategy}/{distribution}/{access_mode}/{ranks} failed: {e}"
            )
            rows.append(
                SweepRow(
                    strategy=strategy,
                    distribution=distribution,
                    access_mode=access_mode,
                    ranks=ranks,
                    ranks_per_node=spec.ranks_per_node or base.ranks_per_node,
                    status="failed",
                    error=str(e),
                )
            )
    return rows
