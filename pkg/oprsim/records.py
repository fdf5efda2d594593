"""Run records, aggregate rows, and their CSV persistence (results and trajectories)."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .dynamics import Mode, Trajectory
from .errors import CsvFormatError

CSV_HEADER = [
    "seed",
    "sigma",
    "controller",
    "attack_step",
    "alarm_step",
    "recovery_steps",
    "final_distance",
    "success",
    "reasons",
]
FAILED_PREFIX = "episode failed:"
REASON_SEPARATOR = ";"


def format_float(value: float) -> str:
    """Nine significant digits, the precision every results file is written at."""
    return format(float(value), ".9g")


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one episode."""

    seed: int
    sigma: float
    controller: str
    attack_step: Optional[int]
    alarm_step: Optional[int]
    recovery_steps: int
    final_distance: float
    success: bool
    reasons: tuple[str, ...] = ()

    @property
    def failed(self) -> bool:
        return any(reason.startswith(FAILED_PREFIX) for reason in self.reasons)

    @property
    def sort_key(self) -> tuple[float, str, int]:
        return (self.sigma, self.controller, self.seed)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sigma": self.sigma,
            "controller": self.controller,
            "attack_step": self.attack_step,
            "alarm_step": self.alarm_step,
            "recovery_steps": self.recovery_steps,
            "final_distance": self.final_distance,
            "success": self.success,
            "reasons": list(self.reasons),
        }


@dataclass(frozen=True)
class Aggregate:
    """Per (sigma, controller) summary of a sweep."""

    sigma: float
    controller: str
    episodes: int
    success_rate: float
    mean_distance: float
    mean_recovery_steps: float
    failed: int


def _optional_int(value: Optional[int]) -> str:
    return "" if value is None else str(int(value))


def _record_row(record: RunRecord) -> list[str]:
    reasons = [r.replace(REASON_SEPARATOR, ",") for r in record.reasons]
    return [
        str(int(record.seed)),
        format_float(record.sigma),
        record.controller,
        _optional_int(record.attack_step),
        _optional_int(record.alarm_step),
        str(int(record.recovery_steps)),
        format_float(record.final_distance),
        "true" if record.success else "false",
        REASON_SEPARATOR.join(reasons),
    ]


def write_csv(records: Iterable[RunRecord], path: Path) -> Path:
    """Write records with the fixed results header; an empty iterable gives a header-only file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(_record_row(record))
    return path


def _parse_optional_int(value: str) -> Optional[int]:
    return None if value == "" else int(value)


def _parse_bool(value: str) -> bool:
    if value not in ("true", "false"):
        raise ValueError(f"success must be 'true' or 'false' (got '{value}')")
    return value == "true"


def _parse_record(row: list[str]) -> RunRecord:
    if len(row) != len(CSV_HEADER):
        raise ValueError(f"expected {len(CSV_HEADER)} fields, got {len(row)}")
    seed, sigma, controller, attack_step, alarm_step, recovery_steps, distance, success, reasons = row
    if not controller:
        raise ValueError("controller is empty")
    return RunRecord(
        seed=int(seed),
        sigma=float(sigma),
        controller=controller,
        attack_step=_parse_optional_int(attack_step),
        alarm_step=_parse_optional_int(alarm_step),
        recovery_steps=int(recovery_steps),
        final_distance=float(distance),
        success=_parse_bool(success),
        reasons=tuple(reasons.split(REASON_SEPARATOR)) if reasons else (),
    )


def read_csv(path: Path) -> list[RunRecord]:
    """Parse a results file; any malformed row raises CsvFormatError naming its line."""
    records = []
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise CsvFormatError(1, f"expected header {','.join(CSV_HEADER)}")
        for row in reader:
            if not row:
                continue
            try:
                records.append(_parse_record(row))
            except ValueError as e:
                raise CsvFormatError(reader.line_num, str(e))
    return records


def _trajectory_header(n: int, m: int, p: int) -> list[str]:
    return (
        ["controller", "step", "mode"]
        + [f"x{i}" for i in range(n)]
        + [f"u{j}" for j in range(m)]
        + [f"y{k}" for k in range(p)]
        + [f"ya{k}" for k in range(p)]
        + ["strip_lo", "strip_hi"]
    )


def write_trajectories(trajectories: Iterable[Trajectory], path: Path) -> Path:
    """One row per recorded step; several controllers share one file through the controller column."""
    trajectories = [t for t in trajectories if len(t)]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not trajectories:
        raise CsvFormatError(0, "no trajectory rows to write")
    first = trajectories[0]
    n, m, p = first.states[0].size, first.inputs[0].size, first.raw[0].size
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_trajectory_header(n, m, p))
        for traj in trajectories:
            band = ["", ""] if traj.strip_band is None else [format_float(v) for v in traj.strip_band]
            for step, x, u, y, ya, mode in zip(
                traj.steps, traj.states, traj.inputs, traj.raw, traj.attacked, traj.modes
            ):
                values = np.concatenate([x, u, y, ya])
                writer.writerow([traj.controller, step, mode.value] + [format_float(v) for v in values] + band)
    return path


def read_trajectories(path: Path) -> list[Trajectory]:
    """Trajectories in file order, one per controller."""
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None) or []
        n = sum(1 for h in header if h.startswith("x"))
        m = sum(1 for h in header if h.startswith("u"))
        p = sum(1 for h in header if h.startswith("ya"))
        if header != _trajectory_header(n, m, p) or n == 0:
            raise CsvFormatError(1, "not a trajectory file")

        trajectories: dict[str, Trajectory] = {}
        for row in reader:
            if not row:
                continue
            try:
                if len(row) != len(header):
                    raise ValueError(f"expected {len(header)} fields, got {len(row)}")
                controller, step, mode = row[0], int(row[1]), Mode(row[2])
                values = np.array([float(v) for v in row[3:-2]])
                traj = trajectories.setdefault(controller, Trajectory(controller=controller))
                if row[-2] and row[-1]:
                    traj.strip_band = (float(row[-2]), float(row[-1]))
                x, rest = values[:n], values[n:]
                u, rest = rest[:m], rest[m:]
                traj.append(step, x, u, rest[:p], rest[p:], mode)
            except ValueError as e:
                raise CsvFormatError(reader.line_num, str(e))
    return list(trajectories.values())


def entry_step(traj: Trajectory, after: int, band: Optional[tuple[float, float]] = None) -> Optional[int]:
    """First step at or after `after` whose altitude lies in the strip band."""
    band = band or traj.strip_band
    if band is None:
        return None
    lo, hi = band
    return traj.first_step_in(lambda x: not math.isnan(x[0]) and lo <= x[0] <= hi, after)
