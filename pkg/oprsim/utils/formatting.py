"""Formatting utilities for CLI output."""

from typing import Iterable, Optional

import click
from rich.table import Table

from ..db.models import Sweep
from ..planner import Verdict
from ..records import Aggregate, RunRecord


def format_record_line(record: RunRecord, entry: Optional[int] = None) -> str:
    """
    Format a run record as a colored single-line string.

    Format: controller [sigma] [seed] [status] alarm=.. recovery=.. distance=.. entry=.. - reasons

    `entry` is the first step back inside the strip after the alarm; it is
    shown only for episodes that raised one.
    """
    if record.failed:
        status, status_color = "failed", "red"
    elif record.success:
        status, status_color = "success", "green"
    else:
        status, status_color = "missed", "yellow"

    line_parts = [
        click.style(f"{record.controller:<8}", fg="cyan"),
        click.style(f"[sigma={record.sigma:g}]", fg="bright_black"),
        click.style(f"[seed={record.seed}]", fg="bright_black"),
        click.style(f"[{status}]", fg=status_color),
        f"alarm={'-' if record.alarm_step is None else record.alarm_step}",
        f"recovery={record.recovery_steps}",
        f"distance={record.final_distance:.4f} m",
    ]
    if record.alarm_step is not None:
        line_parts.append(f"entry={'-' if entry is None else entry}")
    if record.reasons:
        line_parts.append("-")
        line_parts.append(click.style("; ".join(record.reasons), fg="bright_black"))
    return " ".join(line_parts)


def aggregate_table(aggregates: Iterable[Aggregate], title: str = "Sweep aggregates") -> Table:
    table = Table(title=title)
    table.add_column("sigma", justify="right")
    table.add_column("controller")
    table.add_column("episodes", justify="right")
    table.add_column("success rate", justify="right")
    table.add_column("mean distance (m)", justify="right")
    table.add_column("mean recovery (steps)", justify="right")
    table.add_column("failed", justify="right")
    for a in aggregates:
        table.add_row(
            f"{a.sigma:g}",
            a.controller,
            str(a.episodes),
            f"{a.success_rate:.3f}",
            f"{a.mean_distance:.4f}",
            f"{a.mean_recovery_steps:.1f}",
            str(a.failed),
        )
    return table


def sweeps_table(sweeps: Iterable[Sweep]) -> Table:
    table = Table(title="Stored sweeps")
    table.add_column("id", style="cyan")
    table.add_column("label")
    table.add_column("created")
    table.add_column("runs", justify="right")
    table.add_column("config digest", style="bright_black")
    for sweep in sweeps:
        created = sweep.created_at.strftime("%Y-%m-%d %H:%M") if sweep.created_at else "-"
        table.add_row(sweep.id, sweep.label or "", created, str(len(sweep.runs)), sweep.digest[:12])
    return table


def format_verdict(verdict: Verdict) -> str:
    def flag(ok: bool) -> str:
        return click.style("yes", fg="green") if ok else click.style("no", fg="red")

    lines = [
        f"safe:        {flag(verdict.safe)}",
        f"feasible:    {flag(verdict.feasible)}",
        f"achievable:  {verdict.achievable_probability:.4f}",
    ]
    if verdict.reasons:
        lines.append(f"reasons:     {', '.join(verdict.reasons)}")
    return "\n".join(lines)
