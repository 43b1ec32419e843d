from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from ..errors import ParameterError
from ..models import BallBasisIndex, BallTerm, NormTriple
from .orthopoly1d import JacobiParams, jacobi_eval, jacobi_exact
from .polyalg import ExactPoly, as_rational, compose, norm_squared, pochhammer
from .spherical import (
    HarmonicEvaluator,
    derivative_expansion,
    harmonic_basis,
    harmonic_indices,
    raise_expansion,
    sphere_norm,
)


def _param(mu):
    """Keep floats as floats, everything else exact."""
    return mu if isinstance(mu, float) else as_rational(mu)


def _check(mu, n: int, j: int) -> None:
    if mu <= -1:
        raise ParameterError(f"weight parameter mu must exceed -1, got {mu}")
    if j < 0 or 2 * j > n:
        raise ParameterError(f"radial index j={j} invalid for degree {n}")


def b_mu(mu, d: int) -> float:
    """b_mu = Gamma(mu + d/2 + 1) / (pi^{d/2} Gamma(mu + 1))."""
    mu = float(mu)
    return math.exp(gammaln(mu + d / 2 + 1) - gammaln(mu + 1) - d / 2 * math.log(math.pi))


def b_ratio(mu, d: int):
    """b_mu / b_{mu+1} = (mu + 1) / (mu + d/2 + 1)."""
    mu = _param(mu)
    return (mu + 1) / (mu + Fraction(d, 2) + 1)


def h_norm(mu, n: int, j: int, d: int):
    mu = _param(mu)
    _check(mu, n, j)
    if isinstance(mu, float):
        return _h_norm_float(mu, n, j, d)
    half = Fraction(d, 2)
    num = pochhammer(mu + 1, j) * pochhammer(half, n - j) * (n - j + mu + half)
    den = math.factorial(j) * pochhammer(mu + half + 1, n - j) * (n + mu + half)
    return num / den


def _h_norm_float(mu: float, n: int, j: int, d: int) -> float:
    # Pochhammer products overflow doubles near n = 200; take them as gamma ratios
    half = d / 2
    k = n - j
    log_h = (
        gammaln(mu + 1 + j) - gammaln(mu + 1)
        + gammaln(half + k) - gammaln(half)
        - gammaln(j + 1)
        - gammaln(mu + half + 1 + k) + gammaln(mu + half + 1)
    )
    return math.exp(log_h) * (k + mu + half) / (n + mu + half)


def grad_eigenvalue(mu, n: int, j: int, d: int):
    """4j(n - j + mu + d/2) + 2(n - 2j)(mu + 1)."""
    mu = _param(mu)
    _check(mu, n, j)
    return 4 * j * (n - j + mu + Fraction(d, 2)) + 2 * (n - 2 * j) * (mu + 1)


def h_grad(mu, n: int, j: int, d: int):
    return grad_eigenvalue(mu, n, j, d) * h_norm(mu, n, j, d)


def h_ang(mu, n: int, ell: int, d: int):
    q = n - 2 * ell
    return q * (q + d - 2) * h_norm(mu, n, ell, d)


def norms(idx: BallBasisIndex) -> NormTriple:
    return NormTriple(
        h=h_norm(idx.mu, idx.n, idx.j, idx.d),
        h_grad=h_grad(idx.mu, idx.n, idx.j, idx.d),
        h_ang=h_ang(idx.mu, idx.n, idx.j, idx.d),
    )


def kappa(n: int, mu, d: int):
    """kappa_n^mu = 4(n + mu + d/2)(n + (d - 2)/2)."""
    mu = _param(mu)
    return 4 * (n + mu + Fraction(d, 2)) * (n + Fraction(d - 2, 2))


def beltrami_eigen(n: int, j: int, d: int) -> int:
    q = n - 2 * j
    return -q * (q + d - 2)


def laplacian_image(idx: BallBasisIndex) -> BallTerm | None:
    """Delta P_{j,nu}^{n,mu} = kappa_{n-j}^mu P_{j-1,nu}^{n-2,mu+2}; None for the harmonic case j = 0."""
    if idx.j == 0:
        return None
    target = BallBasisIndex(idx.n - 2, idx.j - 1, idx.nu, idx.mu + 2)
    return BallTerm(kappa(idx.n - idx.j, idx.mu, idx.d), target)


@lru_cache(maxsize=None)
def ball_indices(n: int, d: int, mu=Fraction(0)) -> tuple[BallBasisIndex, ...]:
    mu = as_rational(mu)
    return tuple(
        BallBasisIndex(n, j, nu, mu) for j in range(n // 2 + 1) for nu in harmonic_indices(d, n - 2 * j)
    )


@lru_cache(maxsize=None)
def ball_basis_raw(idx: BallBasisIndex) -> ExactPoly:
    """P_j^{(mu, beta_j)}(2|x|^2 - 1) Y_nu(x) with Y_nu not normalised."""
    radial = jacobi_exact(idx.j, idx.mu, idx.beta)
    t = norm_squared(idx.d) * 2 - 1
    return compose(radial, t) * harmonic_basis(idx.nu)


def raw_norm(idx: BallBasisIndex) -> Fraction:
    """<P, P>_mu for the unnormalised element: h_{j,n}^mu times the sphere norm of Y_nu."""
    return h_norm(idx.mu, idx.n, idx.j, idx.d) * sphere_norm(idx.nu)


def ball_basis_eval(idx: BallBasisIndex, x) -> np.ndarray:
    """Orthonormal-Y basis element at points x of shape (N, d) or (d,)."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != idx.d:
        raise ParameterError(f"points have {pts.shape[1]} coordinates, basis lives in d={idx.d}")
    q = idx.nu.degree
    column = harmonic_indices(idx.d, q).index(idx.nu)
    y = HarmonicEvaluator(pts).raw(q)[:, column] / math.sqrt(sphere_norm(idx.nu))
    t = 2 * np.sum(pts * pts, axis=1) - 1
    radial = jacobi_eval(idx.j, JacobiParams(float(idx.mu), float(idx.beta)), t)
    values = radial * y
    return values[0] if np.ndim(x) == 1 else values


def ball_derivative_expansion(idx: BallBasisIndex, i: int) -> list[BallTerm]:
    """d_i of the unnormalised P_{l,eta}^{n,mu} over unnormalised P_{k,tau}^{n-1,mu+1}, k in {l, l-1}.

    With t = 2|x|^2 - 1 and beta = beta_l,
    d_i P = (beta + l)/beta P_l^{(mu+1,beta-1)}(t) d_i Y
            + 2(l + mu + beta + 1) P_{l-1}^{(mu+1,beta+1)}(t) proj(x_i Y).
    """
    if idx.n < 1:
        raise ParameterError("the derivative expansion needs degree >= 1")
    if not 1 <= i <= idx.d:
        raise ParameterError(f"axis {i} out of range 1..{idx.d}")
    ell, beta, mu = idx.j, idx.beta, idx.mu
    terms: list[BallTerm] = []
    if idx.nu.degree > 0:
        scale = (beta + ell) / beta
        for tau, coeff in derivative_expansion(idx.nu, i):
            terms.append(BallTerm(coeff * scale, BallBasisIndex(idx.n - 1, ell, tau, mu + 1)))
    if ell >= 1:
        scale = 2 * (ell + mu + beta + 1)
        for tau, coeff in raise_expansion(idx.nu, i):
            terms.append(BallTerm(coeff * scale, BallBasisIndex(idx.n - 1, ell - 1, tau, mu + 1)))
    return terms


def assemble_ball(terms: list[BallTerm], d: int) -> ExactPoly:
    result = ExactPoly.zero(d)
    for term in terms:
        result = result + ball_basis_raw(term.index) * term.coeff
    return result
