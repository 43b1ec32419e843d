from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from ballharm.errors import ParameterError, QuadratureError
from ballharm.models import BallBasisIndex, HarmonicIndex
from ballharm.services.ballbasis import ball_basis_eval, h_norm
from ballharm.services.quadrature import (
    build_ball_rule,
    build_sphere_rule,
    certify_rule,
    certify_sphere_rule,
    inner_product,
    sphere_norms,
)
from ballharm.services.spherical import harmonic_indices, sphere_norm


def ones(points):
    return np.ones(len(points))


@pytest.mark.parametrize("d,mu", [(2, 0), (2, Fraction(1, 2)), (3, 1), (3, Fraction(3, 2))])
def test_weights_sum_to_one(d, mu):
    rule = build_ball_rule(d, mu, 16)
    assert abs(rule.weights.sum() - 1) < 1e-13
    assert np.all(rule.weights > 0)
    assert rule.exact_degree == 16


def test_second_moment_on_disk():
    rule = build_ball_rule(2, 0, 4)
    assert rule.integrate(rule.nodes[:, 0] ** 2) == pytest.approx(0.25, rel=1e-13)


def test_fourth_moment_in_three_dimensions():
    rule = build_ball_rule(3, 1, 6)
    assert rule.integrate(rule.nodes[:, 2] ** 4) == pytest.approx(1 / 21, rel=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_odd_monomials_vanish(d):
    rule = build_ball_rule(d, Fraction(1, 2), 11)
    for axis in range(d):
        assert abs(rule.integrate(rule.nodes[:, axis] ** 3)) < 1e-14
        assert abs(rule.integrate(rule.nodes[:, axis] * np.sum(rule.nodes**2, axis=1))) < 1e-14


@pytest.mark.parametrize("d,mu,degree", [(2, 0, 12), (3, Fraction(1, 2), 12), (3, 2, 20)])
def test_certification_reruns(d, mu, degree):
    rule = build_ball_rule(d, mu, degree)
    assert certify_rule(rule, degree) < 1e-12


def test_sphere_rules_certify():
    for d in (2, 3, 4):
        assert certify_sphere_rule(build_sphere_rule(d, 10), 10) < 1e-12


@pytest.mark.parametrize("d,mu,degree", [(2, 0, 80), (3, 1, 60), (4, Fraction(1, 2), 24)])
def test_certification_covers_full_exact_degree(d, mu, degree):
    rule = build_ball_rule(d, mu, degree)
    assert certify_rule(rule) < 1e-12
    assert certify_sphere_rule(rule.sphere) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_overstated_sphere_degree_is_caught(d):
    honest = build_sphere_rule(d, 10)
    overstated = replace(honest, exact_degree=30)
    with pytest.raises(QuadratureError):
        certify_sphere_rule(overstated)
    assert certify_sphere_rule(overstated, 10) < 1e-12


def test_overstated_ball_degree_is_caught():
    overstated = replace(build_ball_rule(2, 0, 10), exact_degree=30)
    with pytest.raises(QuadratureError):
        certify_rule(overstated)
    assert certify_rule(overstated, 10) < 1e-12


def test_inner_products_against_basis():
    mu = Fraction(1)
    rule = build_ball_rule(2, mu, 12)
    nu = HarmonicIndex.of(0, 1)
    p = BallBasisIndex(1, 0, nu, mu)
    q = BallBasisIndex(3, 1, nu, mu)
    assert inner_product(ones, ones, rule) == pytest.approx(1.0)
    assert abs(inner_product(lambda x: ball_basis_eval(p, x), lambda x: ball_basis_eval(q, x), rule)) < 1e-12
    assert inner_product(lambda x: ball_basis_eval(q, x), lambda x: ball_basis_eval(q, x), rule) == pytest.approx(
        float(h_norm(mu, 3, 1, 2)), rel=1e-12
    )


def test_numeric_sphere_norms():
    expected = [float(sphere_norm(idx)) for idx in harmonic_indices(3, 3)]
    assert np.allclose(sphere_norms(3, 3), expected, rtol=1e-12)


def test_evaluate_checks_shape():
    rule = build_ball_rule(2, 0, 4)
    assert np.all(rule.evaluate(lambda x: 2.0) == 2.0)
    with pytest.raises(ParameterError):
        rule.evaluate(lambda x: np.ones(3))


def test_invalid_rules():
    with pytest.raises(ParameterError):
        build_ball_rule(1, 0, 4)
    with pytest.raises(ParameterError):
        build_ball_rule(2, -1, 4)
    with pytest.raises(ParameterError):
        build_ball_rule(2, 0, -1)
