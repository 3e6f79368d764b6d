"""Session logger that records runs as markdown files."""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Optional, Sequence

from src.models import CounterSnapshot, OracleReport, StepObservables

# Observable rows shown at each end of a run's table
_TABLE_EDGE = 5


class RunLogger:
    """
    Logger that saves one markdown file per run into a timestamped session directory.
    """

    def __init__(self, base_dir: Optional[str] = None) -> None:
        """
        Initialize the logger.

        Args:
            base_dir: Base directory for sessions. Defaults to 'logs' in the root.
        """
        if base_dir:
            self.base_dir = Path(base_dir)
        else:
            # src/services/logger.py -> project root
            self.base_dir = Path(__file__).parent.parent.parent / "logs"

        self.session_dir: Optional[Path] = None
        self.run_counter: int = 0
        self.session_timestamp: Optional[str] = None

    def start_session(self, command: str, config: Optional[dict[str, Any]] = None) -> str:
        """
        Start a new session by creating a timestamped directory.

        Args:
            command: What the session executes (run, sweep, oracle).
            config: Base configuration of the session.

        Returns:
            Path of the session directory.
        """
        self.session_timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S-%f")
        self.session_dir = self.base_dir / self.session_timestamp
        self.session_dir.mkdir(parents=True, exist_ok=True)
        self.run_counter = 0

        content = f"""# Session: {self.session_timestamp}

- **Command:** {command}
- **Started:** {datetime.now().isoformat()}

## Configuration

```json
{json.dumps(config or {}, indent=2, default=str)}
```

---

## Runs

One markdown file per completed run in this directory.
"""
        (self.session_dir / "00_session_info.md").write_text(content, encoding="utf-8")
        return str(self.session_dir)

    def log_run(
        self,
        label: str,
        observables: Sequence[StepObservables],
        counters: CounterSnapshot,
        wall_time_s: float,
    ) -> str:
        """
        Save the outcome of one run.

        Returns:
            Path of the created file.

        Raises:
            RuntimeError: If a session has not been started.
        """
        if not self.session_dir:
            raise RuntimeError("Must call start_session() before log_run()")

        self.run_counter += 1
        safe_label = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in label)
        filepath = self.session_dir / f"{self.run_counter:02d}_{safe_label}.md"

        parts = [
            f"# {label}",
            "",
            f"**Finished:** {datetime.now().isoformat()}",
            f"**Wall time:** {wall_time_s:.4f} s",
            "",
            "## Observables",
            "",
            "| step | kinetic | potential | total | temperature |",
            "|---:|---:|---:|---:|---:|",
        ]
        rows = list(observables)
        if len(rows) > 2 * _TABLE_EDGE:
            shown = rows[:_TABLE_EDGE] + [None] + rows[-_TABLE_EDGE:]
        else:
            shown = rows
        for obs in shown:
            if obs is None:
                parts.append("| ... | | | | |")
                continue
            parts.append(
                f"| {obs.step} | {obs.kinetic:.8g} | {obs.potential:.8g} "
                f"| {obs.total:.8g} | {obs.temperature:.6g} |"
            )

        parts.extend([
            "",
            "## Counter totals",
            "",
            "```json",
            counters.totals.model_dump_json(indent=2),
            "```",
            "",
        ])
        filepath.write_text("\n".join(parts), encoding="utf-8")
        return str(filepath)

    def log_oracle(self, report: OracleReport) -> str:
        """
        Save the outcome of an all-pairs force check.

        Returns:
            Path of the created file.

        Raises:
            RuntimeError: If a session has not been started.
        """
        if not self.session_dir:
            raise RuntimeError("Must call start_session() before log_oracle()")

        self.run_counter += 1
        filepath = self.session_dir / f"{self.run_counter:02d}_oracle.md"
        verdict = "passed" if report.passed else "FAILED"
        parts = [
            f"# Oracle check ({report.n_molecules} molecules): {verdict}",
            "",
            f"**Finished:** {datetime.now().isoformat()}",
            f"**All-pairs potential:** {report.oracle_potential:.12g}",
            "",
            "| strategy | force deviation | potential deviation | passed |",
            "|---|---:|---:|---|",
        ]
        for name, dev in report.strategies.items():
            parts.append(
                f"| {name} | {dev.max_force_deviation:.3e} "
                f"| {dev.potential_deviation:.3e} | {dev.passed} |"
            )
        parts.append("")
        filepath.write_text("\n".join(parts), encoding="utf-8")
        return str(filepath)

    def end_session(self, success: bool, errors: Optional[list] = None) -> None:
        """
        End the session by appending a summary.

        Args:
            success: Whether every run of the session completed.
            errors: Error messages, if any.
        """
        if not self.session_dir:
            return

        status = "Completed" if success else "Failed"
        summary = f"""

---

## Summary

- **Status:** {status}
- **Runs logged:** {self.run_counter}
- **Finished:** {datetime.now().isoformat()}
"""
        if errors:
            summary += "\n### Errors\n\n"
            for error in errors:
                summary += f"- {error}\n"

        with open(self.session_dir / "00_session_info.md", "a", encoding="utf-8") as f:
            f.write(summary)
