"""CLI for opr-sim - attack recovery experiments for a simplex-controlled drone."""

import click

from .. import __version__
from .common import SimGroup, setup_logging
from .experiment import register_experiment_commands
from .plot import plot
from .results import results


@click.group(cls=SimGroup)
@click.version_option(version=__version__, prog_name="sim", message="%(prog)s version %(version)s")
@click.option("--verbose", "-v", count=True, help="Log to stderr (-v info, -vv debug)")
@click.pass_context
def cli(ctx, verbose: int):
    """opr-sim - detect a GPS spoof, plan a safe strip, and recover the drone."""
    ctx.ensure_object(dict)
    setup_logging(verbose)


# Register command groups
cli.add_command(plot)
cli.add_command(results)

# Register experiment commands (init, run, sweep, verify)
register_experiment_commands(cli)


def main():
    """Console entry point: exit 0 on success, 1 on usage errors, 2 on runtime failures."""
    cli()
