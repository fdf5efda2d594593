"""Results store CLI commands."""

import json
from pathlib import Path

import click

from ..errors import OprSimError
from ..records import write_csv
from ..utils import aggregate_table, sweeps_table
from .common import RuntimeFailure, get_results_service, stdout_console

DB_OPTION = click.option(
    "--db", "db_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="SQLite results database"
)


@click.group()
def results():
    """Stored sweep results."""
    pass


@results.command("list")
@DB_OPTION
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
def results_list(db_path: Path, as_json: bool):
    """List stored sweeps, newest first."""
    service = get_results_service(db_path)
    sweeps = service.list_sweeps()
    if as_json:
        click.echo(json.dumps([s.to_dict() for s in sweeps], indent=2))
    elif not sweeps:
        click.echo("No sweeps stored.")
    else:
        stdout_console.print(sweeps_table(sweeps))


@results.command("show")
@DB_OPTION
@click.option("--id", "sweep_id", required=True, help="Sweep ID (6-character)")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
def results_show(db_path: Path, sweep_id: str, as_json: bool):
    """Show the aggregate table of a stored sweep."""
    service = get_results_service(db_path)
    try:
        sweep = service.get(sweep_id)
        aggregates = service.aggregates(sweep_id)
    except OprSimError as e:
        raise RuntimeFailure(str(e))

    if as_json:
        data = sweep.to_dict()
        data["aggregates"] = [a.__dict__ for a in aggregates]
        click.echo(json.dumps(data, indent=2))
        return
    click.echo(f"Sweep {click.style(sweep.id, fg='cyan')} {sweep.label}".rstrip())
    click.echo(f"   Created: {sweep.created_at:%Y-%m-%d %H:%M}")
    click.echo(f"   Config digest: {sweep.digest}")
    stdout_console.print(aggregate_table(aggregates, title=f"Sweep {sweep.id}"))


@results.command("export")
@DB_OPTION
@click.option("--id", "sweep_id", required=True, help="Sweep ID (6-character)")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Results CSV to write")
def results_export(db_path: Path, sweep_id: str, out: Path):
    """Export a stored sweep as a results CSV."""
    service = get_results_service(db_path)
    try:
        records = service.get_records(sweep_id)
        write_csv(records, out)
    except (OprSimError, OSError) as e:
        raise RuntimeFailure(str(e))
    click.echo(f"✓ {len(records)} records written to {click.style(str(out), fg='cyan')}")
