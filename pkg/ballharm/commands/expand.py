from __future__ import annotations

import click
from flask import current_app

from ..errors import ParameterError, QuadratureError, ReliabilityError
from ..services.expansion import error_estimate
from ..services.functions import get_function
from ..services.output import expansion_filename, resolve_path, write_expansion_csv
from ..services.rates import expand_image
from ..services.settings import rate_settings_from_config
from . import EXIT_CONFIG, EXIT_OK, EXIT_RELIABILITY, apply_log_level, log_level_option, run_config_or_exit


def register(cli) -> None:
    @cli.command("expand")
    @click.option("--f", "function", required=True, help="Registered test function.")
    @click.option("--d", "d", type=int, default=2, show_default=True)
    @click.option("--mu", default="0", show_default=True)
    @click.option("--N", "n_degree", type=int, default=20, show_default=True, help="Largest degree expanded.")
    @click.option("--out", type=click.Path(), default=None, help="CSV file or directory.")
    @click.option("--quad-degree", type=int, default=None, help="Exactness of the ball rule (default 2N + oversample).")
    @click.option("--seed", type=int, default=0)
    @log_level_option
    def expand_command(function, d, mu, n_degree, out, quad_degree, seed, log_level):
        """Expand a test function in the ball basis and write its coefficient table."""
        apply_log_level(log_level)
        ctx = click.get_current_context()
        cfg = run_config_or_exit(
            {"command": "expand", "functions": [function], "d": d, "mu": mu, "N": n_degree,
             "out": out, "quad_degree": quad_degree, "seed": seed}
        )
        settings = rate_settings_from_config(current_app.config, cfg.quad_degree)
        try:
            func = get_function(cfg.function, cfg.d)
            table = expand_image(func, func.expr, cfg.mu, cfg.N, settings)
        except ParameterError as exc:
            click.echo(f"Error: {exc}", err=True)
            ctx.exit(EXIT_CONFIG)
        except (QuadratureError, ReliabilityError) as exc:
            current_app.logger.warning("expansion of %s is not reliable: %s", cfg.function, exc)
            click.echo(f"Error: {exc}", err=True)
            ctx.exit(EXIT_RELIABILITY)

        path = write_expansion_csv(table, resolve_path(cfg.out, expansion_filename(cfg.function, table)), cfg.function)
        click.echo(f"{cfg.function}: d={cfg.d} mu={cfg.mu} N={cfg.N} rule degree {table.exact_degree}")
        click.echo(f"  |f|^2 = {table.f_norm_sq:.12g}, Parseval defect {table.parseval_defect():.3e}, refinement shift {table.convergence_shift:.2e}")
        if table.convergence_shift > settings.convergence_tol:
            click.echo(f"  warning: refinement moved coefficients by more than {settings.convergence_tol:.1e}")
        click.echo(f"  {'n':>4}  {'E_n':>12}  tail")
        for n in range(0, cfg.N + 1, max(cfg.N // 10, 1)):
            estimate = error_estimate(table, n, settings.tail_window, settings.tail_fraction)
            flag = "truncated" if estimate.truncated else ""
            click.echo(f"  {n:>4}  {estimate.value:>12.4e}  {flag}")
        click.echo(f"wrote {path}")
        ctx.exit(EXIT_OK)
