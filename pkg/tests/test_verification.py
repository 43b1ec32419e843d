from fractions import Fraction

import pytest

from ballharm.services.verification import (
    SUITES,
    VerifyOptions,
    as_options,
    h_ratio_checks,
    polynomial_fixtures,
    run_suite,
    suite_names,
)


def failures(checks):
    return [(check.label, check.detail) for check in checks if not check.passed]


def test_suite_names():
    assert suite_names("all") == ["identities", "orthogonality", "appendix", "commuting"]
    assert suite_names("appendix") == ["appendix"]
    assert all(SUITES[name]["covers"] for name in SUITES)


def test_fixtures_are_reproducible():
    assert polynomial_fixtures(3, 5, 4, seed=2) == polynomial_fixtures(3, 5, 4, seed=2)
    assert all(p.degree <= 4 for p in polynomial_fixtures(2, 10, 4, seed=0))


def test_as_options():
    assert as_options(3, "1/2", 4, 1) == VerifyOptions(d=3, mu=Fraction(1, 2), n_max=4, seed=1, fixtures=20)


def test_h_ratio_checks():
    checks = list(h_ratio_checks(VerifyOptions()))
    assert len(checks) == 3
    assert not failures(checks)


@pytest.mark.parametrize("mu", [Fraction(0), Fraction(2)])
def test_h_ratio_checks_reach_degree_two_hundred(mu):
    checks = list(h_ratio_checks(VerifyOptions(d=2, mu=mu)))
    assert not failures(checks)
    assert all("at m=200" in check.detail for check in checks[1:])


def test_crashing_suite_is_reported_as_failure(monkeypatch):
    def crash(opts):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setitem(SUITES["appendix"], "run", crash)
    checks = run_suite("appendix", VerifyOptions())
    assert [(c.label, c.passed) for c in checks] == [("appendix suite", False)]
    assert "division by zero" in checks[0].detail


@pytest.mark.parametrize("d", [2, 3])
def test_appendix_suite(d):
    checks = run_suite("appendix", VerifyOptions(d=d, n_max=6))
    assert len(checks) == (1 if d == 2 else 3)
    assert not failures(checks)


@pytest.mark.slow
@pytest.mark.parametrize("d,mu", [(2, Fraction(0)), (3, Fraction(1, 2))])
def test_identities_suite(d, mu):
    assert not failures(run_suite("identities", VerifyOptions(d=d, mu=mu, n_max=4, fixtures=4)))


@pytest.mark.slow
@pytest.mark.parametrize("d,mu", [(2, Fraction(1)), (3, Fraction(0))])
def test_orthogonality_suite(d, mu):
    assert not failures(run_suite("orthogonality", VerifyOptions(d=d, mu=mu, n_max=3)))


@pytest.mark.slow
def test_commuting_suite():
    assert not failures(run_suite("commuting", VerifyOptions(d=2, mu=Fraction(1, 2), n_max=4, fixtures=4)))
