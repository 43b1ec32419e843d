from fractions import Fraction

import numpy as np
import pytest
from scipy.special import eval_jacobi, roots_jacobi

from ballharm.errors import ParameterError
from ballharm.services.orthopoly1d import (
    JacobiParams,
    chebyshev_t_exact,
    gauss_jacobi,
    gegenbauer_eval,
    gegenbauer_exact,
    gegenbauer_identity_residuals,
    jacobi_contiguous,
    jacobi_contiguous_exact,
    jacobi_contiguous_rhs,
    jacobi_deriv,
    jacobi_eval,
    jacobi_exact,
    jacobi_ode_residual,
    jacobi_ode_residual_exact,
)
from ballharm.services.polyalg import ExactPoly

t = ExactPoly.variable(1, 1)


def test_legendre_values():
    assert jacobi_eval(0, JacobiParams(0, 0), 0.3) == pytest.approx(1.0)
    assert jacobi_eval(2, JacobiParams(0, 0), 0.0) == pytest.approx(-0.5)
    assert jacobi_exact(2, 0, 0) == (3 * t * t - 1) / 2


def test_jacobi_endpoint_value():
    # P_n^(a,b)(1) = (a + 1)_n / n!
    assert jacobi_eval(3, JacobiParams(1, 2), 1.0) == pytest.approx(2 * 3 * 4 / 6)


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (-0.5, 0.5), (1.5, 0.0), (3.0, 2.5)])
def test_jacobi_eval_matches_scipy(alpha, beta):
    grid = np.linspace(-1.0, 1.0, 41)
    for n in range(0, 25, 4):
        ours = jacobi_eval(n, JacobiParams(alpha, beta), grid)
        assert np.allclose(ours, eval_jacobi(n, alpha, beta, grid), rtol=1e-10, atol=1e-10)


def test_gegenbauer_values():
    assert gegenbauer_eval(2, 1, 1.0) == pytest.approx(3.0)
    assert gegenbauer_eval(-1, 1, 0.4) == 0.0
    assert gegenbauer_exact(2, Fraction(1, 2)) == (3 * t * t - 1) / 2


def test_chebyshev():
    assert chebyshev_t_exact(3) == 4 * t * t * t - 3 * t


def test_mixed_contiguous_relation_spot_value():
    params = JacobiParams(0, 1)
    assert float(jacobi_contiguous("raise_mixed", 1, params, 0.0)) == pytest.approx(1.0)
    assert float(jacobi_contiguous_rhs(1, params, 0.0)) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        jacobi_contiguous("lower", 1, params, 0.0)


@pytest.mark.parametrize("alpha,beta", [(0, 1), (Fraction(1, 2), Fraction(3, 2)), (1, Fraction(1, 2))])
def test_mixed_contiguous_relation_exact(alpha, beta):
    for n in range(7):
        lhs, rhs = jacobi_contiguous_exact(n, alpha, beta)
        assert lhs == rhs


@pytest.mark.parametrize("alpha,beta", [(0, 0), (Fraction(1, 2), 1), (2, Fraction(1, 2))])
def test_jacobi_differential_equation(alpha, beta):
    for n in range(7):
        assert jacobi_ode_residual_exact(n, alpha, beta).is_zero()
    grid = np.linspace(-0.9, 0.9, 7)
    assert np.max(np.abs(jacobi_ode_residual(6, JacobiParams(float(alpha), float(beta)), grid))) < 1e-9


def test_jacobi_derivative_matches_exact():
    params = JacobiParams(0.5, 1.5)
    exact = jacobi_exact(4, Fraction(1, 2), Fraction(3, 2)).diff(1)
    grid = np.linspace(-1, 1, 9)
    assert np.allclose(jacobi_deriv(4, params, grid), exact.evaluate(grid[:, None]), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("lam", [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)])
def test_gegenbauer_relations(lam):
    for n in range(8):
        for residual in gegenbauer_identity_residuals(n, lam, t).values():
            assert residual.is_zero()
    grid = np.linspace(-1, 1, 11)
    for residual in gegenbauer_identity_residuals(6, lam, grid).values():
        assert np.max(np.abs(residual)) < 1e-10


def test_gauss_legendre_two_points():
    rule = gauss_jacobi(2, JacobiParams(0, 0))
    assert rule.mass == pytest.approx(2.0)
    assert rule.integrate(rule.nodes**2) == pytest.approx(2 / 3)
    assert rule.exactness == 3


@pytest.mark.parametrize("k,alpha,beta", [(5, 0.0, 0.5), (12, 1.0, 0.0), (20, 0.5, 1.5)])
def test_gauss_jacobi_matches_scipy(k, alpha, beta):
    rule = gauss_jacobi(k, JacobiParams(alpha, beta))
    nodes, weights = roots_jacobi(k, alpha, beta)
    assert np.allclose(rule.nodes, nodes, rtol=1e-12, atol=1e-13)
    assert np.allclose(rule.weights, weights, rtol=1e-10)


def test_invalid_parameters():
    with pytest.raises(ParameterError):
        JacobiParams(-1, 0)
    with pytest.raises(ParameterError):
        gauss_jacobi(0, JacobiParams(0, 0))
    with pytest.raises(ParameterError):
        gegenbauer_eval(2, -0.5, 0.1)
