"""
Result files: observables CSV, counters JSON, sweep summary CSV, oracle JSON, XYZ frame.
"""
import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence, Union

from src.core.phasespace import PhaseSpace
from src.models import CounterSnapshot, OracleReport, StepObservables, SweepRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

OBSERVABLE_COLUMNS = ("step", "kinetic", "potential", "total", "temperature")
SUMMARY_COLUMNS = tuple(SweepRow.model_fields)
XYZ_ELEMENT = "Ar"


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_observables_csv(path: PathLike, observables: Iterable[StepObservables]) -> Path:
    path = _prepare(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(OBSERVABLE_COLUMNS)
        for obs in observables:
            writer.writerow([getattr(obs, column) for column in OBSERVABLE_COLUMNS])
    logger.info(f"Observables written to {path}")
    return path


def write_counters_json(path: PathLike, counters: CounterSnapshot) -> Path:
    path = _prepare(path)
    path.write_text(counters.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Counters written to {path}")
    return path


def write_summary_csv(path: PathLike, rows: Sequence[SweepRow]) -> Path:
    """One row per sweep combination; empty cells for failed rows."""
    path = _prepare(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {k: "" if v is None else v for k, v in row.model_dump(mode="json").items()}
            )
    logger.info(f"Sweep summary ({len(rows)} rows) written to {path}")
    return path


def write_oracle_json(path: PathLike, report: OracleReport) -> Path:
    path = _prepare(path)
    path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Oracle report written to {path}")
    return path


def write_xyz(path: PathLike, phasespace: PhaseSpace, comment: str = "") -> Path:
    """Single XYZ frame, one ``Ar x y z`` line per molecule in id order."""
    path = _prepare(path)
    positions = phasespace.molecules.sorted_by_id().positions
    lines = [str(len(positions)), comment.replace("\n", " ")]
    lines.extend(f"{XYZ_ELEMENT} {x!r} {y!r} {z!r}" for x, y, z in positions.tolist())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Final frame written to {path}")
    return path
