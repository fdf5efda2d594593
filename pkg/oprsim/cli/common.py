"""Shared CLI utilities."""

import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click
from rich.console import Console
from rich.logging import RichHandler

from ..config import ExperimentConfig, load_config
from ..db.database import get_session, init_db
from ..errors import ConfigError
from ..services import ResultsService

EXIT_USAGE = 1
EXIT_RUNTIME = 2

stdout_console = Console()
stderr_console = Console(stderr=True)


class RuntimeFailure(click.ClickException):
    """A command failed while running; exits with code 2."""

    exit_code = EXIT_RUNTIME


class SimGroup(click.Group):
    """Command group whose usage errors exit with code 1 and runtime failures with code 2."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else 0)


def setup_logging(verbose: int) -> None:
    """Route oprsim logs to stderr through rich: WARNING by default, -v INFO, -vv DEBUG."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    handler = RichHandler(console=stderr_console, show_path=False, rich_tracebacks=True)
    logger = logging.getLogger("oprsim")
    logger.handlers = [handler]
    logger.setLevel(level)


def load_config_or_fail(config_path: Optional[Path]) -> ExperimentConfig:
    """Load the config at `config_path` (defaults when None); invalid files are usage errors."""
    if config_path is None:
        return ExperimentConfig()
    try:
        return load_config(config_path)
    except ConfigError as e:
        raise click.BadParameter("\n  ".join([""] + e.problems), param_hint="--config")


def parse_json_option(value: str, option: str) -> dict:
    try:
        data = json.loads(value)
    except json.JSONDecodeError as e:
        raise click.BadParameter(f"invalid JSON ({e})", param_hint=option)
    if not isinstance(data, dict):
        raise click.BadParameter("expected a JSON object", param_hint=option)
    return data


def get_results_service(db_path: Path, create: bool = False) -> ResultsService:
    """Open the results store; a missing database is a runtime failure unless `create`."""
    if not create and not Path(db_path).exists():
        raise RuntimeFailure(f"No results database at {db_path}. Run `sim sweep --db {db_path}` first.")
    return ResultsService(get_session(init_db(db_path)))
