from pathlib import Path

import pytest

from ballharm.__main__ import run


def test_verify_lists_suites(runner):
    result = runner.invoke(args=["verify", "--list"])
    assert result.exit_code == 0
    for name in ("identities:", "orthogonality:", "appendix:", "commuting:"):
        assert name in result.output


def test_verify_appendix(runner):
    result = runner.invoke(args=["verify", "appendix", "--d", "3", "--n-max", "6"])
    assert result.exit_code == 0, result.output
    assert "[PASS] circle derivative table" in result.output
    assert "3/3 checks passed (d=3, mu=0)" in result.output


def test_verify_rejects_unknown_suite(runner):
    result = runner.invoke(args=["verify", "everything"])
    assert result.exit_code == 2


def test_expand_writes_table(runner, tmp_path):
    result = runner.invoke(args=["expand", "--f", "radial_exp", "--N", "6", "--mu", "1/2", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    path = tmp_path / "expand_radial_exp_d2_mu1over2_N6.csv"
    assert path.exists()
    assert path.read_text().startswith("# function=radial_exp,d=2,mu=1/2,N=6")
    assert f"wrote {path}" in result.output


def test_expand_defaults_to_configured_folder(runner, app):
    result = runner.invoke(args=["expand", "--f", "harmonic_deg6", "--N", "8"])
    assert result.exit_code == 0, result.output
    assert (Path(app.config["BALLHARM_OUTPUT_DIR"]) / "expand_harmonic_k_d2_mu0_N8.csv").exists()


def test_expand_rejects_large_dimension(runner):
    result = runner.invoke(args=["expand", "--f", "radial_exp", "--d", "4"])
    assert result.exit_code == 2
    assert "d <= 3" in result.output


def test_rates_even(runner, tmp_path):
    result = runner.invoke(
        args=["rates", "even", "--f", "harmonic_exp", "--n-min", "4", "--n-max", "8", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    path = tmp_path / "rates_even_harmonic_exp_d2_mu0_s1.csv"
    assert path.exists()
    assert "bounded" in result.output


def test_rates_reject_missing_images(runner):
    result = runner.invoke(args=["rates", "even", "--f", "spherical_h2", "--d", "3", "--s", "1"])
    assert result.exit_code == 2


@pytest.mark.slow
def test_rates_even_for_finite_smooth(runner, tmp_path):
    result = runner.invoke(args=["rates", "even", "--f", "finite_smooth", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "bounded" in result.output
    assert (tmp_path / "rates_even_finite_smooth_d2_mu0_s1.csv").exists()


def test_expand_folds_the_boundary_power(runner, tmp_path):
    result = runner.invoke(args=["expand", "--f", "finite_smooth", "--N", "10", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "warning" not in result.output
    assert (tmp_path / "expand_finite_smooth_d2_mu0_N10.csv").exists()


def test_module_entry_point_runs_the_cli(app):
    with pytest.raises(SystemExit) as excinfo:
        run(app, ["verify", "everything"])
    assert excinfo.value.code == 2
