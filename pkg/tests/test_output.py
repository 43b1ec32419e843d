from fractions import Fraction

import numpy as np
import pytest

from ballharm.errors import ConfigError
from ballharm.services.expansion import expand
from ballharm.services.output import (
    expansion_filename,
    rates_filename,
    read_expansion_csv,
    resolve_path,
    write_expansion_csv,
    write_rates_csv,
)
from ballharm.services.quadrature import build_ball_rule
from ballharm.services.rates import RateReport, RateRow


def r2(points):
    return np.sum(points**2, axis=1)


def test_expansion_csv_layout_and_reload(tmp_path):
    table = expand(r2, Fraction(1, 2), 4, build_ball_rule(2, Fraction(1, 2), 10))
    path = write_expansion_csv(table, tmp_path / expansion_filename("r2", table), "r2")
    assert path.name == "expand_r2_d2_mu1over2_N4.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == "# function=r2,d=2,mu=1/2,N=4,exact_degree=10"
    assert lines[1].startswith("# parseval f_norm_sq=")
    assert lines[2] == "n,j,nu_encoded,coeff,h"
    assert len(lines) == 3 + len(table.coeffs)
    loaded = read_expansion_csv(path)
    assert loaded.provenance == "csv"
    assert (loaded.d, loaded.mu, loaded.N) == (2, Fraction(1, 2), 4)
    assert loaded.coeffs == pytest.approx(table.coeffs)


def test_bad_header(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("# nothing useful\n# here\nn,j\n")
    with pytest.raises(ConfigError):
        read_expansion_csv(path)


def test_resolve_path(app, tmp_path):
    assert resolve_path(tmp_path / "a.csv", "x.csv") == tmp_path / "a.csv"
    folder = resolve_path(tmp_path / "runs", "x.csv")
    assert folder == tmp_path / "runs" / "x.csv" and folder.parent.is_dir()
    with app.app_context():
        default = resolve_path(None, "x.csv")
    assert default.parent.is_dir()
    assert default.parent == tmp_path / "output"


def test_rates_csv(tmp_path):
    rows = (
        RateRow(4, 1e-3, 2e-3, 1e-3, 0.5, 0.4, None, True, False, {"E_d1": 1e-3, "E_D12": 0.0}),
        RateRow(6, 1e-14, 1e-13, 0.0, 0.0, 0.0, None, False, False, {"E_d1": 1e-13, "E_D12": 0.0}),
    )
    report = RateReport("odd", "radial_exp", "radial", 2, Fraction(0), 0, 10, rows, {}, ("E_d1", "E_D12"))
    path = write_rates_csv(report, tmp_path / rates_filename(report))
    assert path.name == "rates_odd_radial_exp_d2_mu0_s0.csv"
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# mode=odd,function=radial_exp")
    assert "bounded=True" in lines[1]
    assert lines[2] == "n,E_f,E_lap,E_bel,ratio,slope,cor_ratio,flag,E_d1,E_D12"
    assert lines[4].split(",")[7] == "floor"
