from __future__ import annotations

import logging
from typing import Any, Callable

import click
from flask import current_app

from ..errors import ConfigError
from ..services.settings import RunConfig, load_run_config

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_RELIABILITY = 3


def log_level_option(f: Callable) -> Callable:
    return click.option(
        "--log-level",
        type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
        default=None,
        help="Override BALLHARM_LOG_LEVEL for this run.",
    )(f)


def apply_log_level(level: str | None) -> None:
    if level:
        current_app.logger.setLevel(getattr(logging, level.upper()))


def run_config_or_exit(options: dict[str, Any]) -> RunConfig:
    """Validate options; a rejected configuration ends the command with exit code 2."""
    try:
        return load_run_config(options)
    except ConfigError as exc:
        current_app.logger.debug("rejected options %s: %s", options, exc.messages)
        click.echo(f"Error: {exc}", err=True)
        click.get_current_context().exit(EXIT_CONFIG)


def register_cli_commands(app) -> None:
    from .expand import register as register_expand
    from .rates import register as register_rates
    from .verify import register as register_verify

    register_verify(app.cli)
    register_expand(app.cli)
    register_rates(app.cli)
