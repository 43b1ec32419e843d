from fractions import Fraction
from pathlib import Path

import pytest

from ballharm.errors import ConfigError
from ballharm.services.settings import load_run_config, rate_settings_from_config


def test_expand_defaults():
    cfg = load_run_config({"command": "expand", "functions": ["radial_exp"]})
    assert (cfg.d, cfg.mu, cfg.N) == (2, Fraction(0), 20)
    assert cfg.function == "radial_exp"
    assert cfg.out is None


def test_rational_mu_and_output_path():
    cfg = load_run_config({"command": "expand", "functions": ["exp_sum"], "mu": "1/2", "d": 3, "out": "runs/a.csv"})
    assert cfg.mu == Fraction(1, 2)
    assert cfg.out == Path("runs/a.csv")


def test_rates_range_and_default_degree():
    cfg = load_run_config(
        {"command": "rates", "mode": "even", "functions": ["exp_sum", "radial_exp"], "n_min": 4, "n_max": 10}
    )
    assert cfg.n_range == (4, 6, 8, 10)
    assert cfg.N == 22
    assert cfg.functions == ("exp_sum", "radial_exp")


def test_verify_needs_a_suite():
    assert load_run_config({"command": "verify", "suite": "all"}).suite == "all"
    with pytest.raises(ConfigError) as excinfo:
        load_run_config({"command": "verify"})
    assert "suite" in excinfo.value.messages


@pytest.mark.parametrize(
    "options,field",
    [
        ({"command": "expand", "functions": ["radial_exp"], "d": 4}, "d"),
        ({"command": "expand", "functions": ["nope"]}, "functions"),
        ({"command": "expand", "functions": ["radial_exp"], "mu": "-1"}, "mu"),
        ({"command": "expand", "functions": ["radial_exp"], "mu": "abc"}, "mu"),
        ({"command": "expand", "functions": ["spherical_h2"], "d": 2}, "d"),
        ({"command": "expand", "functions": ["radial_exp"], "N": 10, "quad_degree": 15}, "quad_degree"),
        ({"command": "rates", "mode": "even", "functions": ["spherical_h2"], "d": 3}, "s"),
        ({"command": "rates", "mode": "even", "functions": ["exp_sum"], "s": 3}, "s"),
        ({"command": "rates", "mode": "even", "functions": ["exp_sum"], "n_min": 12, "n_max": 10}, "n_min"),
        ({"command": "rates", "mode": "odd", "functions": ["exp_sum"], "s": 1, "n_min": 2}, "n_min"),
        ({"command": "rates", "mode": "even", "functions": ["exp_sum"], "n_max": 30, "N": 20}, "n_max"),
        ({"command": "plot"}, "command"),
    ],
)
def test_rejected_configurations(options, field):
    with pytest.raises(ConfigError) as excinfo:
        load_run_config(options)
    assert field in excinfo.value.messages


def test_rate_settings_from_config(app):
    settings = rate_settings_from_config(app.config, quad_degree=64)
    assert settings.workers == 2
    assert settings.rule_degree(10) == 64
    assert rate_settings_from_config({}).rule_degree(10) == 40
    with pytest.raises(ConfigError):
        rate_settings_from_config({"BALLHARM_TAIL_WINDOW": "wide"})


def test_certification_cap_is_opt_in():
    assert rate_settings_from_config({}).certify_degree is None
    assert rate_settings_from_config({"BALLHARM_CERTIFY_DEGREE": "40"}).certify_degree == 40
    with pytest.raises(ConfigError):
        rate_settings_from_config({"BALLHARM_CERTIFY_DEGREE": "all"})
