from fractions import Fraction

import numpy as np
import pytest

from ballharm.errors import ParameterError
from ballharm.services.functions import get_function
from ballharm.services.rates import (
    Experiment,
    RateReport,
    RateRow,
    RateSettings,
    default_n_range,
    measure_even,
    measure_odd,
    run_experiments,
)

SETTINGS = RateSettings(workers=2)


def row(n, ratio, resolved=True, e_f=1.0):
    return RateRow(n, e_f, 0.5, 0.5, ratio, ratio, None, resolved, False)


def test_default_range():
    assert default_n_range(4, 10, 2) == [4, 6, 8, 10]
    assert default_n_range() == list(range(4, 41, 2))


def test_boundedness_uses_median_of_resolved_rows():
    rows = (row(4, 1.0), row(6, 1.2), row(8, 10.0), row(10, 50.0, resolved=False))
    report = RateReport("even", "f", "entire", 2, Fraction(0), 1, 12, rows, {})
    assert report.ratio_spread() == (10.0, 1.2)
    assert not report.bounded
    relaxed = RateReport("even", "f", "entire", 2, Fraction(0), 1, 12, rows[:2], {})
    assert relaxed.bounded
    assert report.exponent == 2


def test_row_flags():
    assert row(4, 1.0, resolved=False).flag == "floor"
    assert RateRow(4, 1.0, 1.0, 1.0, 1.0, 1.0, None, True, True).flag == "tail"
    assert row(4, 1.0).flag == ""
    assert RateRow(4, 1.0, 1.0, 1.0, 1.0, 1.0, None, True, False, shifted=True).flag == "shift"
    assert RateRow(4, 1.0, 1.0, 1.0, 1.0, 1.0, None, True, True, shifted=True).flag == "tail"


def test_range_validation():
    func = get_function("exp_sum", 2)
    with pytest.raises(ParameterError):
        measure_even(func, 0, 1, [1, 4], 10, SETTINGS)
    with pytest.raises(ParameterError):
        measure_even(func, 0, 1, [4, 20], 10, SETTINGS)
    with pytest.raises(ParameterError):
        measure_even(func, 0, 0, [4], 10, SETTINGS)
    with pytest.raises(ParameterError):
        measure_odd(get_function("finite_smooth", 2), 0, 2, [6], 10, SETTINGS)


@pytest.mark.slow
def test_even_rates_for_a_harmonic_function():
    report = measure_even(get_function("harmonic_exp", 2), 0, 1, (4, 6, 8), 14, SETTINGS)
    assert [r.n for r in report.rows] == [4, 6, 8]
    assert all(r.resolved for r in report.rows)
    assert all(r.e_lap == 0.0 for r in report.rows)
    # Delta_0 scales the degree-q harmonic part by q^2, so the ratio sits just below n^2/(n+1)^2
    assert all(0.3 < r.ratio < 1.0 for r in report.rows)
    assert report.bounded
    assert report.slope < 0
    assert all(q < 1 for q in report.decay_ratios())


@pytest.mark.slow
def test_odd_rates_for_a_radial_function():
    report = measure_odd(get_function("radial_exp", 2), Fraction(1, 2), 0, (3, 5, 7), 12, SETTINGS)
    assert report.term_labels == ("E_d1", "E_d2", "E_D12")
    assert all(r.terms["E_D12"] == 0.0 for r in report.rows)
    assert all(r.resolved and r.ratio > 0 for r in report.rows)
    assert report.norms["D12"] == 0.0
    assert report.exponent == 1


@pytest.mark.slow
def test_experiments_come_back_in_order():
    experiments = [
        Experiment("even", get_function(name, 2), Fraction(0), 1, (4, 6), 8) for name in ("harmonic_deg6", "exp_sum")
    ]
    reports = run_experiments(experiments, SETTINGS)
    assert [r.function for r in reports] == ["harmonic_deg6", "exp_sum"]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["exp_sum", "finite_smooth"])
@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("mu", [Fraction(0), Fraction(1)])
@pytest.mark.parametrize("mode,s", [("even", 1), ("even", 2), ("odd", 0), ("odd", 1)])
def test_rate_ratios_stay_bounded(name, d, mu, mode, s):
    measure = measure_even if mode == "even" else measure_odd
    report = measure(get_function(name, d), mu, s, default_n_range(4, 40, 2), 52, SETTINGS)
    assert len(report.resolved_rows()) >= 3
    assert report.bounded, report.ratio_spread()


@pytest.mark.slow
def test_finite_smooth_decays_at_its_boundary_order():
    # E_n((1 - |x|^2)^g)_mu ~ n^-(2g + mu + 1)
    gamma, mu = 2.5, 0
    report = measure_even(get_function("finite_smooth", 2), mu, 1, default_n_range(4, 40, 2), 52, SETTINGS)
    assert all(r.resolved for r in report.rows)
    assert all(r.flag != "shift" for r in report.rows)
    tail = [r for r in report.rows if r.n >= 20]
    fit = np.polyfit(np.log([r.n for r in tail]), np.log([r.e_f for r in tail]), 1)
    assert abs(fit[0] + (2 * gamma + mu + 1)) < 0.5


@pytest.mark.slow
@pytest.mark.parametrize("name", ["exp_sum", "radial_exp"])
def test_entire_functions_decay_faster_than_any_power(name):
    report = measure_even(get_function(name, 2), 0, 1, default_n_range(4, 16, 2), 28, SETTINGS)
    ratios = report.decay_ratios()
    assert len(ratios) >= 3
    assert max(ratios) < 0.5
    assert ratios[-1] < 0.5 * ratios[0]
