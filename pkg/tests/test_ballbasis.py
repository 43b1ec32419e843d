from fractions import Fraction
from math import comb

import numpy as np
import pytest

from ballharm.errors import ParameterError
from ballharm.models import BallBasisIndex, HarmonicIndex
from ballharm.services.ballbasis import (
    assemble_ball,
    b_mu,
    b_ratio,
    ball_basis_eval,
    ball_basis_raw,
    ball_derivative_expansion,
    ball_indices,
    beltrami_eigen,
    h_ang,
    h_grad,
    h_norm,
    kappa,
    laplacian_image,
    norms,
    raw_norm,
)
from ballharm.services.polyalg import ExactPoly, exact_inner_product, laplacian, norm_squared


def test_h_norm_values():
    assert h_norm(0, 0, 0, 2) == 1
    assert h_norm(Fraction(1, 2), 0, 0, 3) == 1
    assert h_norm(0, 1, 0, 2) == Fraction(1, 2)
    assert h_norm(0, 2, 1, 2) == Fraction(1, 3)


@pytest.mark.parametrize("mu,n,j,d", [(0, 192, 58, 2), (2, 190, 57, 2), (Fraction(1, 2), 200, 100, 3), (1, 200, 50, 3)])
def test_float_h_norm_survives_high_degree(mu, n, j, d):
    exact = float(h_norm(mu, n, j, d))
    value = h_norm(float(mu), n, j, d)
    assert np.isfinite(value) and value > 0
    assert value == pytest.approx(exact, rel=1e-11)


def test_h_grad_values():
    assert h_grad(0, 0, 0, 2) == 0
    assert h_grad(0, 1, 0, 2) == 1
    # eigenvalue 8 times h = 1/3
    assert h_grad(0, 2, 1, 2) == Fraction(8, 3)


def test_h_ang_values():
    assert h_ang(0, 2, 1, 2) == 0
    assert h_ang(0, 1, 0, 2) == Fraction(1, 2)
    assert h_ang(0, 1, 0, 3) == 2 * h_norm(0, 1, 0, 3)


def test_norm_triple():
    idx = BallBasisIndex(3, 1, HarmonicIndex.of(0, 1), Fraction(1))
    triple = norms(idx)
    assert triple.h == h_norm(1, 3, 1, 2)
    assert triple.h_ang == 1 * 1 * triple.h


def test_kappa_and_beltrami_eigen():
    assert kappa(1, 0, 2) == 8
    assert beltrami_eigen(2, 0, 3) == -6
    assert beltrami_eigen(5, 1, 2) == -9
    assert beltrami_eigen(4, 2, 3) == 0


def test_b_mu_normalisation():
    assert b_mu(0, 2) == pytest.approx(1 / np.pi)
    assert b_ratio(0, 2) == Fraction(1, 2)
    assert b_mu(0, 3) / b_mu(1, 3) == pytest.approx(float(b_ratio(0, 3)))


def test_radial_element_at_degree_two():
    idx = BallBasisIndex(2, 1, HarmonicIndex.of(0, 0), 0)
    assert ball_basis_raw(idx) == 2 * norm_squared(2) - 1
    assert laplacian(ball_basis_raw(idx)) == 8


def test_orthonormal_y_evaluation():
    idx = BallBasisIndex(1, 0, HarmonicIndex.of(0, 1), 0)
    points = np.array([[0.1, 0.2], [-0.3, 0.5]])
    assert np.allclose(ball_basis_eval(idx, points), np.sqrt(2) * points[:, 1])
    assert ball_basis_eval(idx, np.array([0.0, 0.5])) == pytest.approx(np.sqrt(2) * 0.5)


@pytest.mark.parametrize("d,mu", [(2, Fraction(0)), (3, Fraction(1, 2)), (4, Fraction(1))])
def test_indices_count_all_polynomials_of_a_degree(d, mu):
    for n in range(5):
        assert len(ball_indices(n, d, mu)) == comb(n + d - 1, n)


@pytest.mark.parametrize("d,mu", [(2, Fraction(0)), (3, Fraction(1)), (2, Fraction(1, 2))])
def test_exact_orthogonality(d, mu):
    indices = [idx for n in range(4) for idx in ball_indices(n, d, mu)]
    for a, p in enumerate(indices):
        for q in indices[a:]:
            value = exact_inner_product(ball_basis_raw(p), ball_basis_raw(q), mu)
            assert value == (raw_norm(p) if p == q else 0)


@pytest.mark.parametrize("d,mu", [(2, Fraction(0)), (3, Fraction(1, 2)), (4, Fraction(0))])
def test_laplacian_image(d, mu):
    for n in range(6):
        for idx in ball_indices(n, d, mu):
            image = laplacian_image(idx)
            expected = ExactPoly.zero(d) if image is None else ball_basis_raw(image.index) * image.coeff
            assert laplacian(ball_basis_raw(idx)) == expected


@pytest.mark.parametrize("d,mu", [(2, Fraction(0)), (3, Fraction(1, 2)), (4, Fraction(1))])
def test_derivative_expansion_is_exact_and_sparse(d, mu):
    for n in range(1, 5):
        for idx in ball_indices(n, d, mu):
            p = ball_basis_raw(idx)
            for i in range(1, d + 1):
                terms = ball_derivative_expansion(idx, i)
                assert assemble_ball(terms, d) == p.diff(i)
                assert len(terms) <= 2 ** (d - 1)
                assert {t.index.j for t in terms} <= {idx.j, idx.j - 1}
                assert all(t.index.mu == mu + 1 for t in terms)


def test_derivative_of_linear_element_is_a_single_constant():
    idx = BallBasisIndex(1, 0, HarmonicIndex.of(0, 1), 0)
    terms = ball_derivative_expansion(idx, 2)
    assert len(terms) == 1
    assert terms[0].index.n == 0 and terms[0].coeff == 1


def test_invalid_indices():
    with pytest.raises(ParameterError):
        h_norm(0, 2, 2, 2)
    with pytest.raises(ParameterError):
        h_norm(-1, 2, 0, 2)
    with pytest.raises(ParameterError):
        BallBasisIndex(2, 0, HarmonicIndex.of(0, 1), 0)
    with pytest.raises(ParameterError):
        ball_derivative_expansion(BallBasisIndex(0, 0, HarmonicIndex.of(0, 0), 0), 1)
