"""Plot CLI command."""

from pathlib import Path
from typing import Optional

import click

from ..errors import OprSimError
from ..records import read_csv, read_trajectories
from ..services import aggregate
from ..utils import METRICS, emit_plot
from .common import RuntimeFailure


@click.command()
@click.option("--in", "results_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Results CSV from `sim sweep`")
@click.option("--traj", "traj_paths", multiple=True, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Trajectory CSV from `sim run --traj` (repeatable)")
@click.option("--metric", "-m", required=True, type=click.Choice(METRICS), help="What to plot")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False, path_type=Path), help="SVG file to write")
def plot(results_path: Optional[Path], traj_paths: tuple[Path, ...], metric: str, out: Path):
    """Render a sweep aggregate or episode trajectories as SVG."""
    if metric == "timeseries":
        if not traj_paths:
            raise click.UsageError("--metric timeseries needs at least one --traj file")
    elif results_path is None:
        raise click.UsageError(f"--metric {metric} needs --in results.csv")

    try:
        if metric == "timeseries":
            data = [t for path in traj_paths for t in read_trajectories(path)]
        else:
            data = aggregate(read_csv(results_path))
        emit_plot(data, metric, out)
    except (OprSimError, OSError) as e:
        raise RuntimeFailure(str(e))
    click.echo(f"✓ Plot written to {click.style(str(out), fg='cyan')}")
