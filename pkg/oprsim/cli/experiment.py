"""Experiment CLI commands (init, run, sweep, verify)."""

import json
from pathlib import Path
from typing import Optional

import click
import numpy as np
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from ..config import ExperimentConfig, save_config
from ..dynamics import GaussianBelief
from ..errors import OprSimError
from ..planner import verify_target
from ..records import entry_step, write_csv, write_trajectories
from ..recovery.controllers import CONTROLLERS
from ..services import run_episode, sweep as run_sweep
from ..utils import aggregate_table, format_record_line, format_verdict
from .common import RuntimeFailure, get_results_service, load_config_or_fail, parse_json_option, stderr_console, stdout_console

CONFIG_OPTION = click.option(
    "--config", "-c", "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Experiment config (JSON); defaults when omitted",
)


def register_experiment_commands(cli):
    """Register experiment commands with the CLI group."""

    @cli.command()
    @click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path), default=Path("experiment.json"),
                  show_default=True, help="Where to write the default config")
    @click.option("--force", is_flag=True, help="Overwrite an existing file")
    def init(out: Path, force: bool):
        """Write the default experiment config."""
        if out.exists() and not force:
            raise click.UsageError(f"{out} already exists (use --force to overwrite)")
        path = save_config(ExperimentConfig(), out)
        click.echo(f"✓ Default config written to {click.style(str(path), fg='cyan')}")

    @cli.command()
    @CONFIG_OPTION
    @click.option("--controller", "-C", "controllers", multiple=True, required=True,
                  type=click.Choice(list(CONTROLLERS)), help="Recovery controller (repeatable)")
    @click.option("--seed", "-s", type=click.IntRange(min=0), required=True, help="Episode seed")
    @click.option("--sigma", type=click.FloatRange(min=0.0), default=1.0, show_default=True,
                  help="Noise multiplier")
    @click.option("--traj", type=click.Path(dir_okay=False, path_type=Path),
                  help="Write the trajectories of every controller to this CSV")
    @click.option("--json", "as_json", is_flag=True, help="Print records as JSON")
    def run(config_path: Optional[Path], controllers: tuple[str, ...], seed: int, sigma: float,
            traj: Optional[Path], as_json: bool):
        """Run one episode per controller on the same seed."""
        config = load_config_or_fail(config_path)
        records, trajectories, entries = [], [], []
        try:
            for name in controllers:
                record, trajectory = run_episode(config, name, seed, sigma)
                records.append(record)
                trajectories.append(trajectory)
                entries.append(None if record.alarm_step is None else entry_step(trajectory, record.alarm_step))
            if traj:
                write_trajectories(trajectories, traj)
        except (OprSimError, OSError) as e:
            raise RuntimeFailure(str(e))

        if as_json:
            click.echo(json.dumps([{**r.to_dict(), "entry_step": e} for r, e in zip(records, entries)], indent=2))
        else:
            for record, entry in zip(records, entries):
                click.echo(format_record_line(record, entry))
            if traj:
                click.echo(f"✓ Trajectories written to {click.style(str(traj), fg='cyan')}")

    @cli.command()
    @CONFIG_OPTION
    @click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path),
                  help="Results CSV (default: output.results from the config)")
    @click.option("--workers", "-w", type=click.IntRange(min=1), help="Worker processes (default: sweep.workers)")
    @click.option("--db", "db_path", type=click.Path(dir_okay=False, path_type=Path),
                  help="Also store the sweep in this SQLite results database")
    @click.option("--label", default="", help="Label stored with the sweep")
    @click.option("--quiet", "-q", is_flag=True, help="No progress bar or table")
    def sweep(config_path: Optional[Path], out: Optional[Path], workers: Optional[int],
              db_path: Optional[Path], label: str, quiet: bool):
        """Run the noise sweep and write the results CSV."""
        config = load_config_or_fail(config_path)
        out = out or Path(config.output.results)
        db_path = db_path or (Path(config.output.db) if config.output.db else None)

        try:
            if quiet:
                result = run_sweep(config, workers)
            else:
                columns = (TextColumn("sweep"), BarColumn(), MofNCompleteColumn(), TimeElapsedColumn())
                with Progress(*columns, console=stderr_console, transient=True) as progress:
                    bar = progress.add_task("episodes", total=None)
                    result = run_sweep(config, workers,
                                       lambda done, total: progress.update(bar, completed=done, total=total))
            write_csv(result.records, out)
            stored = None
            if db_path:
                stored = get_results_service(db_path, create=True).record_sweep(config, result.records, label)
        except (OprSimError, OSError) as e:
            raise RuntimeFailure(str(e))

        if not quiet:
            stdout_console.print(aggregate_table(result.aggregates))
        click.echo(f"✓ {len(result.records)} records written to {click.style(str(out), fg='cyan')}")
        if stored is not None:
            click.echo(f"✓ Sweep stored as {click.style(stored.id, fg='cyan')} in {db_path}")

    @cli.command()
    @CONFIG_OPTION
    @click.option("--theta", required=True, help='Strip parameters, e.g. \'{"theta1":[1,0],"theta2":9.5,"theta3":10.5}\'')
    @click.option("--sigma", type=click.FloatRange(min=0.0), default=1.0, show_default=True,
                  help="Noise multiplier of the model used for the feasibility check")
    @click.option("--altitude", type=float, help="Belief mean altitude in m (default: the setpoint)")
    @click.option("--velocity", type=float, default=0.0, show_default=True, help="Belief mean velocity in m/s")
    @click.option("--json", "as_json", is_flag=True, help="Print the verdict as JSON")
    def verify(config_path: Optional[Path], theta: str, sigma: float, altitude: Optional[float],
               velocity: float, as_json: bool):
        """Run the target-set verifier standalone."""
        config = load_config_or_fail(config_path)
        params = parse_json_option(theta, "--theta")
        try:
            model = config.build_model(sigma)
            z = config.nominal.setpoint if altitude is None else altitude
            belief = GaussianBelief(np.array([z, velocity]), model.C.T @ model.R @ model.C)
            verdict = verify_target(
                params, model, belief, config.bounds(), config.recovery.k_max,
                config.planner.p_min, config.planner_context(),
            )
        except OprSimError as e:
            raise RuntimeFailure(str(e))

        if as_json:
            click.echo(json.dumps({
                "safe": verdict.safe,
                "feasible": verdict.feasible,
                "achievable_probability": verdict.achievable_probability,
                "reasons": list(verdict.reasons),
            }))
        else:
            click.echo(format_verdict(verdict))
