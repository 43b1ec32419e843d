from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from ..errors import ParameterError
from ..models import HarmonicExpansion, HarmonicIndex
from .orthopoly1d import gegenbauer_eval
from .polyalg import (
    ExactPoly,
    as_rational,
    laplacian,
    norm_squared,
    pochhammer,
    sphere_inner_product,
)

logger = logging.getLogger(__name__)


def harmonic_dimension(d: int, n: int) -> int:
    """dim H_n^d = dim P_n^d - dim P_{n-2}^d."""
    if n < 0:
        return 0
    lower = comb(n + d - 3, n - 2) if n >= 2 else 0
    return comb(n + d - 1, n) - lower


@lru_cache(maxsize=None)
def harmonic_indices(d: int, n: int) -> tuple[HarmonicIndex, ...]:
    """All basis indices of degree n, ordered by last entry then recursively."""
    if d < 2:
        raise ParameterError(f"spherical harmonics need d >= 2, got {d}")
    if n < 0:
        return ()
    if d == 2:
        indices = [HarmonicIndex(2, (0, n))]
        if n >= 1:
            indices.append(HarmonicIndex(2, (1, n - 1)))
        return tuple(indices)
    return tuple(head.extend(m) for m in range(n + 1) for head in harmonic_indices(d - 1, n - m))


@lru_cache(maxsize=None)
def f_lambda(d: int, n: int, lam) -> ExactPoly:
    """F_n^lambda(x) = |x|^n C_n^lambda(x_d/|x|) as a homogeneous polynomial."""
    lam = as_rational(lam)
    if n < 0:
        return ExactPoly.zero(d)
    if lam <= 0 or (2 * lam).denominator != 1:
        raise ParameterError(f"F_n^lambda needs a positive (half-)integer lambda, got {lam}")
    prev = ExactPoly.constant(d, 1)
    if n == 0:
        return prev
    xd = ExactPoly.variable(d, d)
    r2 = norm_squared(d)
    cur = xd * (2 * lam)
    for k in range(2, n + 1):
        prev, cur = cur, (xd * cur * (2 * (k + lam - 1)) - r2 * prev * (k + 2 * lam - 2)) / k
    return cur


@dataclass(frozen=True)
class FDerivative:
    """factor * (x_axis if axis else 1) * F_n^lam."""

    factor: Fraction
    axis: int | None
    n: int
    lam: Fraction

    def to_poly(self, d: int) -> ExactPoly:
        if self.factor == 0 or self.n < 0:
            return ExactPoly.zero(d)
        poly = f_lambda(d, self.n, self.lam) * self.factor
        if self.axis is not None:
            poly = poly * ExactPoly.variable(d, self.axis)
        return poly


def partial_f_lambda(d: int, n: int, lam, i: int) -> FDerivative:
    lam = as_rational(lam)
    if not 1 <= i <= d:
        raise ParameterError(f"axis {i} out of range 1..{d}")
    if n <= 0:
        return FDerivative(Fraction(0), None, -1, lam)
    if i == d:
        return FDerivative(n + 2 * lam - 1, None, n - 1, lam)
    return FDerivative(-2 * lam, i, n - 2, lam + 1)


def _circle_harmonic(idx: HarmonicIndex) -> ExactPoly:
    # Re and Im of (x_2 + i x_1)^n
    n = idx.degree
    want_odd = idx.n[0] == 1
    terms = {}
    for k in range(n + 1):
        if (k % 2 == 1) != want_odd:
            continue
        sign = -1 if (k // 2) % 2 else 1
        terms[(k, n - k)] = sign * comb(n, k)
    return ExactPoly(2, terms)


@lru_cache(maxsize=None)
def harmonic_basis(idx: HarmonicIndex) -> ExactPoly:
    """Y_n, built as Y_{n'}(x') F_{n_d}^{lambda_d}(x) down to the circle basis."""
    if idx.d == 2:
        return _circle_harmonic(idx)
    head = harmonic_basis(idx.head).embed(idx.d)
    return head * f_lambda(idx.d, idx.last, idx.lam())


def assemble(expansion: HarmonicExpansion) -> ExactPoly:
    result = ExactPoly.zero(expansion.d)
    for idx, coeff in expansion:
        result = result + harmonic_basis(idx) * coeff
    return result


def project_to_harmonic(p: ExactPoly) -> ExactPoly:
    """Harmonic component of a homogeneous polynomial."""
    if not p.is_homogeneous():
        raise ParameterError("projection onto harmonics needs a homogeneous polynomial")
    if p.is_zero():
        return p
    d, n = p.dim, p.degree
    r2 = norm_squared(d)
    shift = Fraction(-n + 2) - Fraction(d, 2)
    result = ExactPoly.zero(d)
    term = p
    j = 0
    radial = ExactPoly.constant(d, 1)
    while not term.is_zero():
        scale = Fraction(1, 4**j * factorial(j)) / pochhammer(shift, j)
        result = result + radial * term * scale
        term = laplacian(term)
        radial = radial * r2
        j += 1
    return result


def _accumulate(target: dict, idx: HarmonicIndex, coeff: Fraction) -> None:
    value = target.get(idx, Fraction(0)) + coeff
    if value:
        target[idx] = value
    else:
        target.pop(idx, None)


def _place(expansion: dict[HarmonicIndex, Fraction], last: int, scale: Fraction, target: dict) -> None:
    if last < 0:
        return
    for head, coeff in expansion.items():
        _accumulate(target, head.extend(last), coeff * scale)


def _circle_derivative(idx: HarmonicIndex, i: int) -> dict[HarmonicIndex, Fraction]:
    n = idx.degree
    if n == 0:
        return {}
    real = idx.n[0] == 0
    if i == 2:
        # d_2 z^n = n z^{n-1}
        if real:
            return {HarmonicIndex(2, (0, n - 1)): Fraction(n)}
        return {HarmonicIndex(2, (1, n - 2)): Fraction(n)} if n >= 2 else {}
    # d_1 z^n = i n z^{n-1}
    if real:
        return {HarmonicIndex(2, (1, n - 2)): Fraction(-n)} if n >= 2 else {}
    return {HarmonicIndex(2, (0, n - 1)): Fraction(n)}


def _circle_raise(idx: HarmonicIndex, i: int) -> dict[HarmonicIndex, Fraction]:
    n = idx.degree
    real = idx.n[0] == 0
    if n == 0:
        target = HarmonicIndex(2, (0, 1)) if i == 2 else HarmonicIndex(2, (1, 0))
        return {target: Fraction(1)}
    half = Fraction(1, 2)
    if i == 2:
        return {HarmonicIndex(2, (0, n + 1) if real else (1, n)): half}
    if real:
        return {HarmonicIndex(2, (1, n)): half}
    return {HarmonicIndex(2, (0, n + 1)): -half}


def _check(idx: HarmonicIndex, i: int) -> None:
    if not 1 <= i <= idx.d:
        raise ParameterError(f"axis {i} out of range 1..{idx.d}")


@lru_cache(maxsize=None)
def _derivative(idx: HarmonicIndex, i: int) -> dict[HarmonicIndex, Fraction]:
    if idx.d == 2:
        return _circle_derivative(idx, i)
    m, lam = idx.last, idx.lam()
    head = idx.head
    out: dict[HarmonicIndex, Fraction] = {}
    if i == idx.d:
        if m >= 1:
            _accumulate(out, head.extend(m - 1), m + 2 * lam - 1)
        return out
    _place(_raise(head, i), m - 2, -2 * lam, out)
    if head.degree > 0:
        c = (m + 2 * lam - 1) * (m + 2 * lam - 2) / ((2 * lam - 1) * (2 * lam - 2))
        _place(_derivative(head, i), m, c, out)
    return out


@lru_cache(maxsize=None)
def _raise(idx: HarmonicIndex, i: int) -> dict[HarmonicIndex, Fraction]:
    if idx.d == 2:
        return _circle_raise(idx, i)
    m, lam = idx.last, idx.lam()
    head = idx.head
    out: dict[HarmonicIndex, Fraction] = {}
    if i == idx.d:
        _accumulate(out, head.extend(m + 1), Fraction(m + 1) / (2 * (m + lam)))
        return out
    _place(_raise(head, i), m, lam / (m + lam), out)
    if head.degree > 0:
        c = Fraction((m + 1) * (m + 2)) / ((2 * lam - 1) * (2 * lam - 2) * 2 * (m + lam))
        _place(_derivative(head, i), m + 2, -c, out)
    return out


def derivative_expansion(idx: HarmonicIndex, i: int) -> HarmonicExpansion:
    """d_i Y_n in the degree n-1 basis."""
    _check(idx, i)
    return HarmonicExpansion.from_mapping(idx.d, idx.degree - 1, _derivative(idx, i))


def raise_expansion(idx: HarmonicIndex, i: int) -> HarmonicExpansion:
    """Harmonic projection of x_i Y_n in the degree n+1 basis."""
    _check(idx, i)
    return HarmonicExpansion.from_mapping(idx.d, idx.degree + 1, _raise(idx, i))


@lru_cache(maxsize=None)
def sphere_norm(idx: HarmonicIndex) -> Fraction:
    y = harmonic_basis(idx)
    return sphere_inner_product(y, y)


def beltrami_eigenvalue(n: int, d: int) -> int:
    return -n * (n + d - 2)


class HarmonicEvaluator:
    """Floating-point values of every basis harmonic of one degree on a point set.

    Uses the homogeneous recurrence
    F_k = [2(k + lam - 1) x_d F_{k-1} - (k + 2 lam - 2) |x|^2 F_{k-2}] / k
    instead of expanding monomials, so high degrees stay cheap.
    """

    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] < 2:
            raise ParameterError("points must be an (N, d) array with d >= 2")
        self.d = self.points.shape[1]
        self._cache: dict[tuple[int, int], np.ndarray] = {}
        self._f_cache: dict[tuple[int, int, Fraction], np.ndarray] = {}

    def _f(self, dim: int, m: int, lam: Fraction) -> np.ndarray:
        key = (dim, m, lam)
        if key not in self._f_cache:
            x = self.points[:, :dim]
            xd = x[:, dim - 1]
            r2 = np.sum(x * x, axis=1)
            lam_f = float(lam)
            prev = np.ones(len(x))
            cur = 2 * lam_f * xd
            if m == 0:
                cur = prev
            for k in range(2, m + 1):
                prev, cur = cur, (2 * (k + lam_f - 1) * xd * cur - (k + 2 * lam_f - 2) * r2 * prev) / k
            self._f_cache[key] = cur
        return self._f_cache[key]

    def raw(self, n: int, dim: int | None = None) -> np.ndarray:
        """Matrix (points x harmonic_indices(dim, n)) of unnormalised values."""
        dim = self.d if dim is None else dim
        key = (dim, n)
        if key in self._cache:
            return self._cache[key]
        x = self.points
        if dim == 2:
            z = (x[:, 1] + 1j * x[:, 0]) ** n
            cols = [z.real] + ([z.imag] if n >= 1 else [])
            values = np.stack(cols, axis=1)
        else:
            blocks = []
            for m in range(n + 1):
                head = self.raw(n - m, dim - 1)
                lam = Fraction(n - m) + Fraction(dim - 2, 2)
                blocks.append(head * self._f(dim, m, lam)[:, None])
            values = np.concatenate(blocks, axis=1)
        self._cache[key] = values
        return values


def addition_formula_residual(n: int, xi, rho) -> np.ndarray:
    """Sum_nu Y_nu(xi) Y_nu(rho) / h_nu - (2n + 1) C_n^{1/2}(<xi, rho>) on S^2."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    if xi.shape[1] != 3 or rho.shape != xi.shape:
        raise ParameterError("the addition formula check runs on pairs of points of S^2")
    h = np.array([float(sphere_norm(idx)) for idx in harmonic_indices(3, n)])
    kernel = np.sum(HarmonicEvaluator(xi).raw(n) * HarmonicEvaluator(rho).raw(n) / h, axis=1)
    cosine = np.clip(np.sum(xi * rho, axis=1), -1.0, 1.0)
    return kernel - (2 * n + 1) * gegenbauer_eval(n, 0.5, cosine)
