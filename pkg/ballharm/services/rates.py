from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy as sp

from ..errors import ParameterError
from .expansion import CoefficientTable, ErrorEstimate, check_convergence, error_estimate, expand
from .functions import TestFunction, is_zero
from .polyalg import as_rational
from .quadrature import build_ball_rule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateSettings:
    """Numerical knobs of an experiment; commands fill them from the app config."""

    oversample: int = 20
    convergence_step: int = 10
    convergence_tol: float = 1e-9
    convergence_abort: float = 1e-6
    tail_window: int = 5
    tail_fraction: float = 0.01
    certify_degree: int | None = None
    precision_floor: float = 1e-11
    rate_bound: float = 3.0
    workers: int | None = None
    quad_degree: int | None = None

    def rule_degree(self, N: int) -> int:
        return self.quad_degree if self.quad_degree is not None else 2 * N + self.oversample


@dataclass(frozen=True)
class RateRow:
    n: int
    e_f: float
    e_lap: float
    e_bel: float
    ratio: float
    cor_ratio: float
    slope: float | None
    resolved: bool
    truncated: bool
    terms: dict[str, float] = field(default_factory=dict)
    shifted: bool = False

    @property
    def flag(self) -> str:
        if not self.resolved:
            return "floor"
        if self.truncated:
            return "tail"
        return "shift" if self.shifted else ""


@dataclass(frozen=True)
class RateReport:
    mode: str
    function: str
    smoothness: str
    d: int
    mu: Fraction
    s: int
    N: int
    rows: tuple[RateRow, ...]
    norms: dict[str, float]
    term_labels: tuple[str, ...] = ()
    bound: float = 3.0

    @property
    def exponent(self) -> int:
        return 2 * self.s if self.mode == "even" else 2 * self.s + 1

    def resolved_rows(self) -> list[RateRow]:
        return [row for row in self.rows if row.resolved]

    @property
    def slope(self) -> float | None:
        """Least-squares slope of log E_n(f) against log n over the resolved rows."""
        rows = [row for row in self.resolved_rows() if row.e_f > 0]
        if len(rows) < 2:
            return None
        fit = np.polyfit(np.log([row.n for row in rows]), np.log([row.e_f for row in rows]), 1)
        return float(fit[0])

    def ratio_spread(self) -> tuple[float, float]:
        ratios = [row.ratio for row in self.resolved_rows()]
        if not ratios:
            return 0.0, 0.0
        return float(np.max(ratios)), float(np.median(ratios))

    @property
    def bounded(self) -> bool:
        top, median = self.ratio_spread()
        return top <= self.bound * median or len(self.resolved_rows()) < 2

    def decay_ratios(self) -> list[float]:
        """E_{n+2}/E_n over consecutive resolved rows two degrees apart."""
        by_n = {row.n: row.e_f for row in self.resolved_rows()}
        return [by_n[n + 2] / by_n[n] for n in sorted(by_n) if n + 2 in by_n and by_n[n] > 0]


def _n_range(n_range: Sequence[int], lowest: int, N: int) -> list[int]:
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        raise ParameterError("empty n range")
    if ns[0] < max(lowest, 1):
        raise ParameterError(f"n range must start at n >= {max(lowest, 1)}, got {ns[0]}")
    if ns[-1] > N:
        raise ParameterError(f"n range reaches {ns[-1]} beyond the expansion degree N={N}")
    return ns


def default_n_range(n_min: int = 4, n_max: int = 40, n_step: int = 2) -> list[int]:
    return list(range(n_min, n_max + 1, n_step))


def expand_image(func: TestFunction, expr: sp.Expr, mu, N: int, settings: RateSettings) -> CoefficientTable | None:
    """Expand one image of ``func`` at weight mu, checked against a finer rule.

    An image of the form (1 - |x|^2)^a p(x) is sampled as p with the power folded into the rule.
    """
    if is_zero(expr):
        return None
    mu = as_rational(mu)
    form = func.boundary_form(expr)
    power = Fraction(0) if form is None else Fraction(str(form.power))
    evaluator = func.evaluator(expr if form is None else form.factor)
    rule = build_ball_rule(func.d, mu + power, settings.rule_degree(N), settings.certify_degree)
    table = expand(evaluator, mu, N, rule, workers=settings.workers, boundary_power=power)
    shift = check_convergence(
        evaluator,
        table,
        settings.convergence_step,
        settings.convergence_tol,
        settings.workers,
        abort_tol=settings.convergence_abort,
    )
    return replace(table, convergence_shift=shift)


def _estimate(table: CoefficientTable | None, n: int, settings: RateSettings) -> ErrorEstimate:
    if table is None:
        return ErrorEstimate(n=n, value=0.0, tail_ratio=0.0, truncated=False)
    return error_estimate(table, n, settings.tail_window, settings.tail_fraction)


def _norm(table: CoefficientTable | None) -> float:
    return 0.0 if table is None else math.sqrt(max(table.f_norm_sq, 0.0))


def _rows(
    ns: list[int],
    exponent: int,
    f_table: CoefficientTable,
    first: list[tuple[str, CoefficientTable | None, int]],
    second: list[tuple[str, CoefficientTable | None, int]],
    settings: RateSettings,
) -> tuple[RateRow, ...]:
    """Assemble rows; ``first``/``second`` hold (label, table, degree offset) of the two denominator sums."""
    f_norm = _norm(f_table)
    den_norm = sum(_norm(t) for _, t, _ in first + second)
    shifted = any(
        t is not None and t.convergence_shift is not None and t.convergence_shift > settings.convergence_tol
        for t in [f_table] + [t for _, t, _ in first + second]
    )
    rows = []
    previous: RateRow | None = None
    for n in ns:
        own = _estimate(f_table, n, settings)
        terms = {}
        truncated = own.truncated
        for label, table, offset in first + second:
            estimate = _estimate(table, n - offset, settings)
            terms[label] = estimate.value
            truncated = truncated or estimate.truncated
        e_lap = sum(terms[label] for label, _, _ in first)
        e_bel = sum(terms[label] for label, _, _ in second)
        resolved = (
            own.value >= settings.precision_floor * (f_norm + 1)
            and e_lap + e_bel >= settings.precision_floor * (den_norm + 1)
        )
        scale = float(n) ** exponent
        ratio = scale * own.value / (e_lap + e_bel) if resolved else 0.0
        cor_ratio = scale * own.value / den_norm if den_norm > 0 else 0.0
        slope = None
        if resolved and previous is not None and previous.e_f > 0:
            slope = math.log(own.value / previous.e_f) / math.log(n / previous.n)
        row = RateRow(n, own.value, e_lap, e_bel, ratio, cor_ratio, slope, resolved, truncated, terms, shifted)
        if truncated:
            logger.warning("n=%s: Parseval tail near N carries >= %.0f%% of E_n^2", n, 100 * settings.tail_fraction)
        rows.append(row)
        if resolved:
            previous = row
    return tuple(rows)


def measure_even(
    func: TestFunction, mu, s: int, n_range: Sequence[int], N: int, settings: RateSettings | None = None
) -> RateReport:
    """n^{2s} E_n(f)_mu against E_{n-2s}(Delta^s f)_{mu+2s} + E_n(Delta_0^s f)_mu."""
    settings = settings or RateSettings()
    mu = as_rational(mu)
    if s < 1:
        raise ParameterError(f"even experiments need s >= 1, got {s}")
    func.check_order("even", s)
    ns = _n_range(n_range, 2 * s, N)
    f_table = expand_image(func, func.expr, mu, N, settings)
    lap = expand_image(func, func.laplacian_power(s), mu + 2 * s, N - 2 * s, settings)
    bel = expand_image(func, func.beltrami_power(s), mu, N, settings)
    rows = _rows(ns, 2 * s, f_table, [("E_lap", lap, 2 * s)], [("E_bel", bel, 0)], settings)
    report = RateReport(
        "even", func.name, func.smoothness, func.d, mu, s, N, rows,
        norms={"f": _norm(f_table), "lap": _norm(lap), "bel": _norm(bel)},
        bound=settings.rate_bound,
    )
    _log_report(report)
    return report


def measure_odd(
    func: TestFunction, mu, s: int, n_range: Sequence[int], N: int, settings: RateSettings | None = None
) -> RateReport:
    """n^{2s+1} E_n(f)_mu against sum_i E_{n-2s-1}(d_i Delta^s f)_{mu+2s+1} + sum_{i<j} E_n(D_{i,j} Delta_0^s f)_mu."""
    settings = settings or RateSettings()
    mu = as_rational(mu)
    if s < 0:
        raise ParameterError(f"odd experiments need s >= 0, got {s}")
    func.check_order("odd", s)
    ns = _n_range(n_range, 2 * s + 1, N)
    f_table = expand_image(func, func.expr, mu, N, settings)
    first = [
        (f"E_d{i}", expand_image(func, func.partial_image(i, s), mu + 2 * s + 1, N - 2 * s - 1, settings), 2 * s + 1)
        for i in range(1, func.d + 1)
    ]
    second = [
        (f"E_D{i}{j}", expand_image(func, func.angular_image(i, j, s), mu, N, settings), 0) for i, j in func.pairs()
    ]
    rows = _rows(ns, 2 * s + 1, f_table, first, second, settings)
    norms = {"f": _norm(f_table)}
    norms.update({label[2:]: _norm(table) for label, table, _ in first + second})
    report = RateReport(
        "odd", func.name, func.smoothness, func.d, mu, s, N, rows, norms,
        term_labels=tuple(label for label, _, _ in first + second),
        bound=settings.rate_bound,
    )
    _log_report(report)
    return report


def _log_report(report: RateReport) -> None:
    top, median = report.ratio_spread()
    logger.info(
        "%s %s d=%s mu=%s s=%s: %s/%s rows resolved, max ratio %.4g, median %.4g",
        report.mode, report.function, report.d, report.mu, report.s,
        len(report.resolved_rows()), len(report.rows), top, median,
    )
    if not report.bounded:
        logger.warning("%s %s: ratio max %.4g exceeds %.1fx the median %.4g", report.mode, report.function, top, report.bound, median)


@dataclass(frozen=True)
class Experiment:
    mode: str
    func: TestFunction
    mu: Fraction
    s: int
    n_range: tuple[int, ...]
    N: int

    def images(self) -> list[sp.Expr]:
        func, s = self.func, self.s
        if self.mode == "even":
            return [func.expr, func.laplacian_power(s), func.beltrami_power(s)]
        return (
            [func.expr]
            + [func.partial_image(i, s) for i in range(1, func.d + 1)]
            + [func.angular_image(i, j, s) for i, j in func.pairs()]
        )

    def prepare(self) -> None:
        """Build the symbolic images and their numpy evaluators up front; sympy stays on one thread."""
        self.func.check_order(self.mode, self.s)
        for expr in self.images():
            form = self.func.boundary_form(expr)
            self.func.evaluator(expr if form is None else form.factor)

    def run(self, settings: RateSettings) -> RateReport:
        measure = measure_even if self.mode == "even" else measure_odd
        return measure(self.func, self.mu, self.s, self.n_range, self.N, settings)


def run_experiments(experiments: Sequence[Experiment], settings: RateSettings | None = None) -> list[RateReport]:
    """Independent experiments run concurrently; reports come back in input order."""
    settings = settings or RateSettings()
    for experiment in experiments:
        experiment.prepare()
    if len(experiments) == 1:
        return [experiments[0].run(settings)]
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        return list(pool.map(lambda experiment: experiment.run(settings), experiments))
