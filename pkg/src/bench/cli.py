"""
Command-line driver.

    pgas-md --nx 4 --ny 4 --nz 4 --steps 10 --ranks 2 --strategy lpc+
    pgas-md --sweep data/sweeps/strong_scaling.json --out results/sweep.csv
    pgas-md --oracle --nx 5 --ny 5 --nz 5 --density 0.3

Exit status: 0 on success, 1 on an engine failure (or a failed oracle check),
2 on a usage error.
"""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.bench.oracle import oracle_check
from src.bench.sweep import load_sweep_spec, run_label, run_sweep
from src.bench.writers import (
    write_counters_json,
    write_observables_csv,
    write_oracle_json,
    write_summary_csv,
    write_xyz,
)
from src.config.settings import Settings, get_settings
from src.errors import ConfigurationError, EngineError
from src.models import AccessMode, Distribution, Schedule, SimConfig, Strategy, load_config
from src.services.logger import RunLogger
from src.simulation import run

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgas-md",
        description="Linked-cell Lennard-Jones MD on an instrumented partitioned shared space",
    )
    grid = parser.add_argument_group("system")
    grid.add_argument("--nx", type=int, default=4, help="Cells along x (default: 4)")
    grid.add_argument("--ny", type=int, default=4, help="Cells along y (default: 4)")
    grid.add_argument("--nz", type=int, default=4, help="Cells along z (default: 4)")
    grid.add_argument("--density", type=float, default=0.5, help="Number density (default: 0.5)")
    grid.add_argument("--cutoff", type=float, default=3.0, help="Cut-off radius = cell edge")
    grid.add_argument(
        "--shift-potential", action="store_true", help="Shift u(r) to 0 at the cut-off"
    )
    grid.add_argument("--temperature", type=float, default=1.0, help="Initial temperature")
    grid.add_argument("--seed", type=int, default=42, help="Velocity seed (default: 42)")

    sim = parser.add_argument_group("simulation")
    sim.add_argument("--dt", type=float, default=0.001, help="Time step (default: 0.001)")
    sim.add_argument("--steps", type=int, default=10, help="Number of steps (default: 10)")
    sim.add_argument("--stride", type=int, default=1, help="Record observables every N steps")

    par = parser.add_argument_group("decomposition")
    par.add_argument("--ranks", type=int, default=1, help="Number of ranks (default: 1)")
    par.add_argument(
        "--strategy", choices=[s.value for s in Strategy], default=Strategy.LPC_PLUS.value
    )
    par.add_argument(
        "--dist", choices=[d.value for d in Distribution], default=Distribution.BLOCKED.value
    )
    par.add_argument(
        "--access", choices=[a.value for a in AccessMode], default=AccessMode.LOCAL_VIEW.value
    )
    par.add_argument(
        "--schedule", choices=[s.value for s in Schedule], default=Schedule.LOCKSTEP.value
    )
    par.add_argument("--ranks-per-node", type=int, default=None, help="Ranks sharing one node")

    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--sweep", metavar="SPEC", help="Run the sweep described by a JSON file")
    mode.add_argument(
        "--oracle", action="store_true", help="Verify forces against all-pairs summation"
    )
    parser.add_argument("--repetitions", type=int, default=None, help="Override sweep repetitions")

    out = parser.add_argument_group("output")
    out.add_argument("--out", metavar="CSV", help="Observables CSV (sweep: summary CSV)")
    out.add_argument("--counters", metavar="JSON", help="Counters JSON of a single run")
    out.add_argument("--report", metavar="JSON", help="Oracle report JSON")
    out.add_argument("--xyz", metavar="PATH", help="Final frame as XYZ")
    out.add_argument("--session-log", metavar="DIR", help="Write a markdown session log")
    out.add_argument("--log-level", default=None, help="Logging level (default: from settings)")
    return parser


def config_from_args(args: argparse.Namespace) -> SimConfig:
    """Build the run configuration from parsed flags."""
    return load_config({
        "grid_dims": (args.nx, args.ny, args.nz),
        "density": args.density,
        "lj": {"cutoff": args.cutoff, "shift_potential": args.shift_potential},
        "dt": args.dt,
        "steps": args.steps,
        "ranks": args.ranks,
        "strategy": args.strategy,
        "distribution": args.dist,
        "seed": args.seed,
        "access_mode": args.access,
        "temperature": args.temperature,
        "observable_stride": args.stride,
        "schedule": args.schedule,
        "ranks_per_node": args.ranks_per_node,
    })


def _configure_logging(level: str) -> None:
    logging.basicConfig(format=LOG_FORMAT)
    logging.getLogger("src").setLevel(getattr(logging, level.upper(), logging.INFO))


def _run_single(
    config: SimConfig, args: argparse.Namespace, settings: Settings, session: Optional[RunLogger]
) -> int:
    result = run(config, settings=settings)
    results_dir = Path(settings.results_dir)
    write_observables_csv(args.out or results_dir / "observables.csv", result.observables)
    write_counters_json(args.counters or results_dir / "counters.json", result.counters)
    if args.xyz:
        write_xyz(args.xyz, result.phasespace, comment=f"step {config.steps}")
    if session:
        session.log_run(
            run_label(config),
            result.observables,
            result.counters,
            result.wall_time_s,
        )
    print(f"wall time: {result.wall_time_s:.6f} s")
    return 0


def _run_sweep(
    config: SimConfig,
    args: argparse.Namespace,
    parser: argparse.ArgumentParser,
    settings: Settings,
    session: Optional[RunLogger],
) -> int:
    try:
        spec = load_sweep_spec(args.sweep)
    except (OSError, ValueError, ValidationError) as e:
        parser.error(f"cannot read sweep spec {args.sweep}: {e}")
    start = time.perf_counter()
    rows = run_sweep(
        spec, config, settings=settings, repetitions=args.repetitions, session=session
    )
    wall = time.perf_counter() - start
    write_summary_csv(args.out or Path(settings.results_dir) / "sweep_summary.csv", rows)
    print(f"wall time: {wall:.6f} s")
    failed = [row for row in rows if row.status != "ok"]
    return 1 if failed else 0


def _run_oracle(
    config: SimConfig, args: argparse.Namespace, settings: Settings, session: Optional[RunLogger]
) -> int:
    report = oracle_check(config, settings=settings)
    if session:
        session.log_oracle(report)
    write_oracle_json(args.report or Path(settings.results_dir) / "oracle.json", report)
    for name, dev in report.strategies.items():
        verdict = "ok" if dev.passed else "FAILED"
        print(
            f"{name:5s} force {dev.max_force_deviation:.3e}  "
            f"potential {dev.potential_deviation:.3e}  {verdict}"
        )
    return 0 if report.passed else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    _configure_logging(args.log_level or settings.log_level)

    if args.repetitions is not None and args.repetitions < 1:
        parser.error("--repetitions must be at least 1")
    try:
        config = config_from_args(args)
    except ConfigurationError as e:
        parser.error(str(e))

    session_dir = args.session_log or settings.session_log_dir
    session = RunLogger(session_dir) if session_dir else None
    command = "sweep" if args.sweep else "oracle" if args.oracle else "run"
    if session:
        session.start_session(command, config.model_dump(mode="json"))

    try:
        if args.sweep:
            status = _run_sweep(config, args, parser, settings, session)
        elif args.oracle:
            status = _run_oracle(config, args, settings, session)
        else:
            status = _run_single(config, args, settings, session)
    except EngineError as e:
        logger.error(f"{command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        if session:
            session.end_session(success=False, errors=[str(e)])
        return 1

    if session:
        session.end_session(success=status == 0)
    return status


if __name__ == "__main__":
    sys.exit(main())
