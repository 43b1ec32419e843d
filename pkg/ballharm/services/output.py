from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable

from flask import current_app

from ..errors import ConfigError
from ..models import HarmonicIndex
from .expansion import CoefficientTable
from .rates import RateReport

EXPANSION_COLUMNS = ("n", "j", "nu_encoded", "coeff", "h")
RATE_COLUMNS = ("n", "E_f", "E_lap", "E_bel", "ratio", "slope", "cor_ratio", "flag")


def fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def output_folder() -> Path:
    folder = Path(current_app.config.get("BALLHARM_OUTPUT_DIR", "instance/output"))
    folder.mkdir(parents=True, exist_ok=True)
    return folder


def resolve_path(out: Path | None, default_name: str) -> Path:
    """``out`` may be a file, a directory, or None for the configured output folder."""
    if out is None:
        return output_folder() / default_name
    if out.suffix.lower() != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        return out / default_name
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def expansion_filename(function: str, table: CoefficientTable) -> str:
    return f"expand_{function}_d{table.d}_mu{_mu_tag(table.mu)}_N{table.N}.csv"


def rates_filename(report: RateReport) -> str:
    return f"rates_{report.mode}_{report.function}_d{report.d}_mu{_mu_tag(report.mu)}_s{report.s}.csv"


def _mu_tag(mu: Fraction) -> str:
    return str(mu).replace("/", "over").replace("-", "m")


def _header(handle: IO[str], pairs: Iterable[tuple[str, object]]) -> None:
    handle.write("# " + ",".join(f"{key}={value}" for key, value in pairs) + "\n")


def write_expansion_csv(table: CoefficientTable, path: Path, function: str = "") -> Path:
    captured = float(sum(table.energies()))
    with path.open("w", newline="", encoding="utf-8") as handle:
        _header(
            handle,
            [("function", function), ("d", table.d), ("mu", table.mu), ("N", table.N), ("exact_degree", table.exact_degree)],
        )
        _header(
            handle,
            [("parseval f_norm_sq", fmt(table.f_norm_sq)), ("captured", fmt(captured)), ("defect", fmt(table.f_norm_sq - captured))],
        )
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EXPANSION_COLUMNS)
        for (n, j, nu), coeff in table.coeffs.items():
            writer.writerow([n, j, nu.encode(), fmt(coeff), fmt(table.h[(n, j, nu)])])
    return path


def _parse_header(line: str) -> dict[str, str]:
    body = line.lstrip("#").strip()
    return dict(item.split("=", 1) for item in body.split(",") if "=" in item)


def read_expansion_csv(path: Path) -> CoefficientTable:
    with path.open(encoding="utf-8", newline="") as handle:
        meta = _parse_header(handle.readline())
        parseval = _parse_header(handle.readline())
        try:
            d, N = int(meta["d"]), int(meta["N"])
            mu = Fraction(meta["mu"])
            exact = None if meta.get("exact_degree") in (None, "None", "") else int(meta["exact_degree"])
            f_norm_sq = float(parseval["parseval f_norm_sq"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path} is not a coefficient table: bad header ({exc})") from exc
        coeffs, norms = {}, {}
        for row in csv.DictReader(handle):
            key = (int(row["n"]), int(row["j"]), HarmonicIndex.decode(row["nu_encoded"]))
            coeffs[key] = float(row["coeff"])
            norms[key] = float(row["h"])
    return CoefficientTable(d, mu, N, coeffs, norms, f_norm_sq, exact, provenance="csv")


def write_rates_csv(report: RateReport, path: Path) -> Path:
    top, median = report.ratio_spread()
    with path.open("w", newline="", encoding="utf-8") as handle:
        _header(
            handle,
            [
                ("mode", report.mode),
                ("function", report.function),
                ("smoothness", report.smoothness),
                ("d", report.d),
                ("mu", report.mu),
                ("s", report.s),
                ("N", report.N),
            ],
        )
        _header(
            handle,
            [
                ("fitted_slope", fmt(report.slope)),
                ("max_ratio", fmt(top)),
                ("median_ratio", fmt(median)),
                ("bounded", report.bounded),
            ],
        )
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RATE_COLUMNS + report.term_labels)
        for row in report.rows:
            cells = [row.n, fmt(row.e_f), fmt(row.e_lap), fmt(row.e_bel), fmt(row.ratio), fmt(row.slope), fmt(row.cor_ratio), row.flag]
            writer.writerow(cells + [fmt(row.terms[label]) for label in report.term_labels])
    return path
