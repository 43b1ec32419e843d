from __future__ import annotations

import click
from flask import current_app

from ..errors import ParameterError, QuadratureError, ReliabilityError
from ..services.functions import get_function
from ..services.output import rates_filename, resolve_path, write_rates_csv
from ..services.rates import Experiment, RateReport, run_experiments
from ..services.settings import rate_settings_from_config
from . import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, EXIT_RELIABILITY, apply_log_level, log_level_option, run_config_or_exit

ILLUSTRATIVE = ("spherical",)


def rate_options(f):
    options = [
        click.option("--f", "functions", multiple=True, required=True, help="Test function; repeat for several."),
        click.option("--d", "d", type=int, default=2, show_default=True),
        click.option("--mu", default="0", show_default=True),
        click.option("--s", "s", type=int, default=1, show_default=True, help="Order s of the operator images."),
        click.option("--n-min", type=int, default=4, show_default=True),
        click.option("--n-max", type=int, default=40, show_default=True),
        click.option("--n-step", type=int, default=2, show_default=True),
        click.option("--N", "n_degree", type=int, default=None, help="Expansion degree (default n-max + 12)."),
        click.option("--out", type=click.Path(), default=None, help="Output directory (or CSV file for one function)."),
        click.option("--quad-degree", type=int, default=None),
        click.option("--seed", type=int, default=0),
        log_level_option,
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _summary(report: RateReport) -> str:
    top, median = report.ratio_spread()
    slope = "n/a" if report.slope is None else f"{report.slope:.2f}"
    status = "bounded" if report.bounded else "GROWING"
    return (
        f"{report.function:<14} {report.mode:<4} d={report.d} mu={report.mu} s={report.s}: "
        f"{len(report.resolved_rows())}/{len(report.rows)} rows resolved, "
        f"max/median ratio {top:.4g}/{median:.4g} ({status}), slope {slope}"
    )


def _run(mode: str, options: dict) -> None:
    ctx = click.get_current_context()
    apply_log_level(options.pop("log_level"))
    options["N"] = options.pop("n_degree")
    options["functions"] = list(options["functions"])
    cfg = run_config_or_exit({"command": "rates", "mode": mode, **options})
    settings = rate_settings_from_config(current_app.config, cfg.quad_degree)
    try:
        experiments = [
            Experiment(mode, get_function(name, cfg.d), cfg.mu, cfg.s, cfg.n_range, cfg.N) for name in cfg.functions
        ]
        reports = run_experiments(experiments, settings)
    except ParameterError as exc:
        click.echo(f"Error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    except (QuadratureError, ReliabilityError) as exc:
        current_app.logger.warning("rate experiment aborted: %s", exc)
        click.echo(f"Error: {exc}", err=True)
        ctx.exit(EXIT_RELIABILITY)

    out = cfg.out if cfg.out is None or len(reports) == 1 or cfg.out.suffix.lower() != ".csv" else cfg.out.parent
    for report in reports:
        path = write_rates_csv(report, resolve_path(out, rates_filename(report)))
        click.echo(_summary(report))
        if report.term_labels:
            last = report.rows[-1]
            terms = ", ".join(f"{label}={last.terms[label]:.3e}" for label in report.term_labels)
            click.echo(f"  terms at n={last.n}: {terms}")
        click.echo(f"  wrote {path}")
    growing = [r for r in reports if not r.bounded and r.smoothness not in ILLUSTRATIVE]
    ctx.exit(EXIT_FAILED if growing else EXIT_OK)


def register(cli) -> None:
    @cli.group("rates")
    def rates():
        """Measure best-approximation rates against the operator images."""

    @rates.command("even")
    @rate_options
    def even(**options):
        """n^{2s} E_n(f) against E_{n-2s}(Delta^s f) + E_n(Delta_0^s f)."""
        _run("even", options)

    @rates.command("odd")
    @rate_options
    def odd(**options):
        """n^{2s+1} E_n(f) against the partial-derivative and angular-derivative errors."""
        _run("odd", options)
