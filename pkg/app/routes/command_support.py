from __future__ import annotations

import functools
import logging
from collections.abc import Callable
from typing import Any, TypeVar

import click

from app.config.run_config import RunConfig, load_run_config
from app.exceptions import NcOodError

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

config_option = click.option(
    "--config", "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="key = value run configuration file",
)


def handle_domain_errors(command: F) -> F:
    """Log a domain error and exit with its code instead of a traceback."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except NcOodError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            click.echo(f"Error: {str(e)}", err=True)
            raise SystemExit(e.exit_code) from e

    return wrapper  # type: ignore[return-value]


def run_config_from(config_path: str | None, **overrides: Any) -> RunConfig:
    return load_run_config(config_path, **overrides)
