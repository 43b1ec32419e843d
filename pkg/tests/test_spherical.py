from fractions import Fraction

import numpy as np
import pytest

from ballharm.errors import ParameterError
from ballharm.models import HarmonicIndex
from ballharm.services.polyalg import ExactPoly, laplacian, poly_diff, sphere_inner_product
from ballharm.services.spherical import (
    HarmonicEvaluator,
    addition_formula_residual,
    assemble,
    beltrami_eigenvalue,
    derivative_expansion,
    f_lambda,
    harmonic_basis,
    harmonic_dimension,
    harmonic_indices,
    partial_f_lambda,
    project_to_harmonic,
    raise_expansion,
    sphere_norm,
)


def x(i, d):
    return ExactPoly.variable(d, i)


def test_harmonic_dimension_small_cases():
    assert harmonic_dimension(2, 0) == 1
    assert [harmonic_dimension(2, n) for n in range(1, 6)] == [2] * 5
    assert [harmonic_dimension(3, n) for n in range(6)] == [2 * n + 1 for n in range(6)]
    assert [harmonic_dimension(4, n) for n in range(6)] == [(n + 1) ** 2 for n in range(6)]


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_index_enumeration_matches_dimension(d):
    for n in range(7):
        indices = harmonic_indices(d, n)
        assert len(indices) == harmonic_dimension(d, n)
        assert len(set(indices)) == len(indices)
        assert all(idx.degree == n for idx in indices)


def test_f_lambda_degree_two():
    d = 3
    # |x|^2 P_2(x_3/|x|) = (3 x_3^2 - |x|^2)/2
    expected = x(3, d) * x(3, d) - (x(1, d) * x(1, d) + x(2, d) * x(2, d)) / 2
    assert f_lambda(3, 2, Fraction(1, 2)) == expected


def test_circle_basis():
    assert harmonic_basis(HarmonicIndex.of(0, 0)) == 1
    assert harmonic_basis(HarmonicIndex.of(0, 1)) == x(2, 2)
    assert harmonic_basis(HarmonicIndex.of(0, 2)) == x(2, 2) * x(2, 2) - x(1, 2) * x(1, 2)
    assert harmonic_basis(HarmonicIndex.of(1, 1)) == 2 * x(1, 2) * x(2, 2)


@pytest.mark.parametrize("d", [3, 4])
def test_basis_elements_are_solid_harmonics(d):
    for n in range(6):
        for idx in harmonic_indices(d, n):
            y = harmonic_basis(idx)
            assert laplacian(y).is_zero()
            assert y.is_homogeneous() and y.degree == n


@pytest.mark.parametrize("d", [2, 3, 4])
def test_derivative_and_raise_expansions(d):
    for n in range(5):
        for idx in harmonic_indices(d, n):
            y = harmonic_basis(idx)
            for i in range(1, d + 1):
                assert assemble(derivative_expansion(idx, i)) == poly_diff(y, i)
                assert assemble(raise_expansion(idx, i)) == project_to_harmonic(y * x(i, d))


def test_derivative_expansion_is_sparse():
    for n in range(7):
        for idx in harmonic_indices(4, n):
            for i in range(1, 5):
                assert len(derivative_expansion(idx, i)) <= 4
                assert len(raise_expansion(idx, i)) <= 4


def test_sphere_orthogonality():
    indices = [idx for n in range(4) for idx in harmonic_indices(3, n)]
    for a, y in enumerate(indices):
        for z in indices[a + 1 :]:
            assert sphere_inner_product(harmonic_basis(y), harmonic_basis(z)) == 0


def test_beltrami_eigenvalue():
    assert beltrami_eigenvalue(2, 3) == -6
    assert beltrami_eigenvalue(0, 5) == 0


def test_evaluator_matches_exact_polynomials():
    rng = np.random.default_rng(3)
    points = rng.uniform(-0.7, 0.7, size=(12, 3))
    values = HarmonicEvaluator(points).raw(4)
    for column, idx in enumerate(harmonic_indices(3, 4)):
        assert np.allclose(values[:, column], harmonic_basis(idx).evaluate(points), rtol=1e-12, atol=1e-13)


def test_addition_formula_on_the_two_sphere():
    rng = np.random.default_rng(7)
    xi = rng.standard_normal((10, 3))
    rho = rng.standard_normal((10, 3))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    rho /= np.linalg.norm(rho, axis=1, keepdims=True)
    for n in range(5):
        assert np.max(np.abs(addition_formula_residual(n, xi, rho))) < 1e-10


def test_projection_needs_homogeneous_input():
    with pytest.raises(ParameterError):
        project_to_harmonic(x(1, 2) + 1)


def test_harmonic_index_validation_and_encoding():
    idx = HarmonicIndex.of(1, 0, 3)
    assert idx.degree == 4
    assert HarmonicIndex.decode(idx.encode()) == idx
    with pytest.raises(ParameterError):
        HarmonicIndex.of(2, 1)
    with pytest.raises(ParameterError):
        derivative_expansion(idx, 4)


@pytest.mark.parametrize("d", [3, 4])
@pytest.mark.parametrize("lam", [Fraction(1, 2), Fraction(1), Fraction(3, 2)])
def test_partial_f_lambda_matches_direct_derivative(d, lam):
    for n in range(7):
        for i in range(1, d + 1):
            assert partial_f_lambda(d, n, lam, i).to_poly(d) == poly_diff(f_lambda(d, n, lam), i)


def test_partial_f_lambda_small_cases():
    lam = Fraction(1, 2)
    top = partial_f_lambda(3, 1, lam, 3)
    assert (top.factor, top.axis, top.n) == (1, None, 0)
    side = partial_f_lambda(3, 2, lam, 1)
    assert (side.factor, side.axis, side.n, side.lam) == (-1, 1, 0, Fraction(3, 2))
    assert partial_f_lambda(3, 0, lam, 3).to_poly(3) == ExactPoly.zero(3)


def test_sphere_norm_values():
    assert sphere_norm(HarmonicIndex(3, (0, 0, 0))) == 1
    for n in range(1, 6):
        assert sphere_norm(HarmonicIndex(2, (0, n))) == Fraction(1, 2)
        # average of P_n^2 over [-1, 1]
        assert sphere_norm(HarmonicIndex(3, (0, 0, n))) == Fraction(1, 2 * n + 1)
