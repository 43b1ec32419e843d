from __future__ import annotations

import time

import click
from flask import current_app

from ..services.verification import SUITES, as_options, run_suite
from . import EXIT_FAILED, EXIT_OK, apply_log_level, log_level_option, run_config_or_exit


def register(cli) -> None:
    @cli.command("verify")
    @click.argument("suite", required=False, default="all")
    @click.option("--d", "d", type=int, default=2, show_default=True, help="Dimension of the ball.")
    @click.option("--mu", default="0", show_default=True, help="Weight parameter, e.g. 1/2.")
    @click.option("--n-max", type=int, default=6, show_default=True, help="Largest degree checked.")
    @click.option("--seed", type=int, default=0, show_default=True, help="Seed of the random polynomial fixtures.")
    @click.option("--fixtures", type=int, default=20, show_default=True, help="Number of random fixtures.")
    @click.option("--list", "list_only", is_flag=True, help="Print what every suite checks and exit.")
    @log_level_option
    def verify(suite, d, mu, n_max, seed, fixtures, list_only, log_level):
        """Run the exact identity suites (identities, orthogonality, appendix, commuting or all)."""
        apply_log_level(log_level)
        if list_only:
            for name, entry in SUITES.items():
                click.echo(f"{name}:")
                for item in entry["covers"]:
                    click.echo(f"  - {item}")
            click.get_current_context().exit(EXIT_OK)
        cfg = run_config_or_exit({"command": "verify", "suite": suite, "d": d, "mu": mu, "seed": seed})
        options = as_options(cfg.d, cfg.mu, n_max, cfg.seed, fixtures)
        started = time.perf_counter()
        checks = run_suite(cfg.suite, options)
        for check in checks:
            status = "PASS" if check.passed else "FAIL"
            click.echo(f"[{status}] {check.label}: {check.detail}")
        failed = [check for check in checks if not check.passed]
        current_app.logger.info("verify %s finished in %.1fs", cfg.suite, time.perf_counter() - started)
        click.echo(f"{len(checks) - len(failed)}/{len(checks)} checks passed (d={cfg.d}, mu={cfg.mu})")
        click.get_current_context().exit(EXIT_FAILED if failed else EXIT_OK)
