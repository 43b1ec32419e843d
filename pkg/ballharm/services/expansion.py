from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from ..errors import ParameterError, QuadratureError, ReliabilityError
from ..models import BallBasisIndex, HarmonicIndex
from .ballbasis import b_mu, b_ratio, ball_basis_raw, ball_indices, beltrami_eigen, h_grad, h_norm, kappa, raw_norm
from .orthopoly1d import JacobiParams, jacobi_eval
from .polyalg import (
    ExactPoly,
    angular_derivative,
    as_rational,
    exact_inner_product,
    laplace_beltrami,
    laplacian,
    pochhammer,
)
from .quadrature import BallQuadrature, build_ball_rule, sphere_norms
from .spherical import HarmonicEvaluator, harmonic_indices, sphere_norm

logger = logging.getLogger(__name__)

Key = tuple[int, int, HarmonicIndex]
Evaluatable = Callable[[np.ndarray], np.ndarray]

PARSEVAL_SLACK = 1e-10
CANCELLATION_ULPS = 64


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Fourier coefficients f_{j,nu}^{n,mu} for the orthonormal-Y basis, all n <= N."""

    d: int
    mu: Fraction
    N: int
    coeffs: Mapping[Key, float]
    h: Mapping[Key, float]
    f_norm_sq: float
    exact_degree: int | None = None
    provenance: str = "quadrature"
    sphere_h: Mapping[int, np.ndarray] = field(default_factory=dict, repr=False)
    # the expanded function is (1 - |x|^2)^boundary_power times the sampled one
    boundary_power: Fraction = Fraction(0)
    convergence_shift: float | None = None

    def __post_init__(self):
        for n, j, nu in self.coeffs:
            if not 0 <= 2 * j <= n <= self.N:
                raise ParameterError(f"coefficient index (n={n}, j={j}) outside 0 <= 2j <= n <= {self.N}")
        captured = sum(self.energies())
        if self.provenance == "quadrature" and captured > self.f_norm_sq * (1 + PARSEVAL_SLACK) + PARSEVAL_SLACK:
            raise QuadratureError(
                f"Parseval violated: captured energy {captured!r} exceeds |f|^2 = {self.f_norm_sq!r}"
            )

    def coefficient(self, n: int, j: int, nu: HarmonicIndex) -> float:
        return self.coeffs.get((n, j, nu), 0.0)

    def energies(self) -> np.ndarray:
        out = np.zeros(self.N + 1)
        for key, c in self.coeffs.items():
            out[key[0]] += c * c * self.h[key]
        return out

    def parseval_defect(self) -> float:
        return self.f_norm_sq - float(np.sum(self.energies()))

    def sphere_norms_for(self, q: int) -> np.ndarray:
        if q in self.sphere_h:
            return self.sphere_h[q]
        return sphere_norms(self.d, q)


@dataclass(frozen=True)
class ErrorEstimate:
    n: int
    value: float
    tail_ratio: float
    truncated: bool


def _project_degree(rule: BallQuadrature, mu: Fraction, N: int, q: int, weighted: np.ndarray, y: np.ndarray, hs: np.ndarray):
    d = rule.d
    spherical = weighted @ (y / np.sqrt(hs))
    t = 2 * rule.radii**2 - 1
    beta = q + (d - 2) / 2
    rows = []
    for j in range((N - q) // 2 + 1):
        n = q + 2 * j
        radial = rule.radial_weights * jacobi_eval(j, JacobiParams(float(mu), beta), t) * rule.radii**q
        h = float(h_norm(mu, n, j, d))
        values = (radial @ spherical) / h
        for nu, c in zip(harmonic_indices(d, q), values):
            rows.append(((n, j, nu), float(c), h))
    return rows


def expand(
    f: Evaluatable,
    mu,
    N: int,
    rule: BallQuadrature,
    workers: int | None = None,
    boundary_power=0,
) -> CoefficientTable:
    """All coefficients of f through degree N, using the spherical-polar structure of the rule.

    With a nonzero ``boundary_power`` a the expanded function is (1 - |x|^2)^a f. The power
    is carried by the rule, which must then be built for mu + a.
    """
    mu = as_rational(mu)
    power = as_rational(boundary_power)
    if rule.mu != mu + power:
        raise ParameterError(f"rule is built for mu={rule.mu}, expansion needs mu + a = {mu + power}")
    if N < 0:
        raise ParameterError(f"N must be >= 0, got {N}")
    if rule.exact_degree < 2 * N:
        raise QuadratureError(f"rule exact to degree {rule.exact_degree} cannot expand to N={N} (needs {2 * N})")
    started = time.perf_counter()
    values = rule.evaluate(f)
    if not np.all(np.isfinite(values)):
        raise ParameterError("function is not finite on every quadrature node")
    weighted = rule.grid(values) * rule.sphere.weights[None, :]
    evaluator = HarmonicEvaluator(rule.sphere.points)
    blocks = {q: evaluator.raw(q) for q in range(N + 1)}
    sphere_h = {q: rule.sphere.weights @ (blocks[q] * blocks[q]) for q in range(N + 1)}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(lambda q: _project_degree(rule, mu, N, q, weighted, blocks[q], sphere_h[q]), range(N + 1))
        )
    scale = 1.0 if power == 0 else b_mu(mu, rule.d) / b_mu(rule.mu, rule.d)
    coeffs: dict[Key, float] = {}
    norms: dict[Key, float] = {}
    for rows in results:
        for key, c, h in rows:
            coeffs[key] = c * scale
            norms[key] = h
    if power == 0:
        f_norm_sq = rule.integrate(values * values)
    else:
        f_norm_sq = _folded_norm_sq(f, mu, power, rule)
    table = CoefficientTable(
        d=rule.d,
        mu=mu,
        N=N,
        coeffs=dict(sorted(coeffs.items(), key=lambda item: _order(item[0]))),
        h=norms,
        f_norm_sq=f_norm_sq,
        exact_degree=rule.exact_degree,
        sphere_h=sphere_h,
        boundary_power=power,
    )
    logger.info(
        "expanded to N=%s (d=%s, mu=%s) on %s nodes in %.3fs", N, rule.d, mu, rule.size, time.perf_counter() - started
    )
    return table


def _folded_norm_sq(f: Evaluatable, mu: Fraction, power: Fraction, rule: BallQuadrature) -> float:
    """|(1 - |x|^2)^a f|_mu^2 as (b_mu / b_{mu+2a}) times the mu + 2a integral of f^2."""
    target = mu + 2 * power
    if target <= -1:
        raise ParameterError(f"(1 - |x|^2)^{power} f is not square integrable for mu={mu}")
    norm_rule = build_ball_rule(rule.d, target, rule.exact_degree)
    values = norm_rule.evaluate(f)
    return b_mu(mu, rule.d) / b_mu(target, rule.d) * norm_rule.integrate(values * values)


def _order(key: Key):
    n, j, nu = key
    return n, j, nu.n[::-1]


def check_convergence(
    f: Evaluatable,
    table: CoefficientTable,
    step: int = 10,
    tol: float = 1e-9,
    workers: int | None = None,
    abort_tol: float | None = None,
) -> float:
    """Re-expand with a rule exact to ``step`` more degrees and return the largest coefficient move.

    A move above ``tol`` is logged; only a move above ``abort_tol`` raises.
    """
    if table.exact_degree is None:
        raise ParameterError("convergence checks need a quadrature-built table")
    finer = build_ball_rule(table.d, table.mu + table.boundary_power, table.exact_degree + step)
    refined = expand(f, table.mu, table.N, finer, workers=workers, boundary_power=table.boundary_power)
    shift = max((abs(refined.coeffs[key] - c) for key, c in table.coeffs.items()), default=0.0)
    if abort_tol is not None and shift > abort_tol:
        raise ReliabilityError(
            f"coefficients moved by {shift:.3e} (> {abort_tol:.1e}) when the rule was refined "
            f"from degree {table.exact_degree} to {finer.exact_degree}",
            max_shift=shift,
        )
    if shift > tol:
        logger.warning(
            "coefficients moved by %.3e (> %.1e) after refining the rule to degree %s",
            shift,
            tol,
            finer.exact_degree,
        )
    return shift


def partial_sum_eval(table: CoefficientTable, n: int, x) -> np.ndarray:
    """S_n^mu f at points x of shape (P, d) or (d,)."""
    if not 0 <= n <= table.N:
        raise ParameterError(f"partial sum degree {n} outside 0..{table.N}")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    evaluator = HarmonicEvaluator(pts)
    t = 2 * np.sum(pts * pts, axis=1) - 1
    total = np.zeros(len(pts))
    for q in range(n + 1):
        y = evaluator.raw(q) / np.sqrt(table.sphere_norms_for(q))
        beta = q + (table.d - 2) / 2
        for j in range((n - q) // 2 + 1):
            c = np.array([table.coefficient(q + 2 * j, j, nu) for nu in harmonic_indices(table.d, q)])
            if not np.any(c):
                continue
            total += jacobi_eval(j, JacobiParams(float(table.mu), beta), t) * (y @ c)
    return total[0] if np.ndim(x) == 1 else total


def squared_error(table: CoefficientTable, n: int) -> float:
    """E_n^2 as the energy above degree n: the tail up to N plus what lies beyond N.

    The part beyond N is f_norm_sq minus everything captured; it is dropped when
    it sits inside the cancellation noise of that difference.
    """
    if not 0 <= n <= table.N:
        raise ParameterError(f"error degree {n} outside 0..{table.N}")
    energies = table.energies()
    beyond = table.f_norm_sq - float(np.sum(energies))
    if beyond < CANCELLATION_ULPS * np.finfo(float).eps * max(table.f_norm_sq, 0.0):
        beyond = 0.0
    return max(float(np.sum(energies[n + 1 :])) + beyond, 0.0)


def best_error(table: CoefficientTable, n: int) -> float:
    return math.sqrt(squared_error(table, n))


def error_estimate(table: CoefficientTable, n: int, window: int = 5, fraction: float = 0.01) -> ErrorEstimate:
    """E_n with the truncation diagnostic: energy at degrees N-window..N against E_n^2."""
    e2 = squared_error(table, n)
    energies = table.energies()
    tail = float(np.sum(energies[max(table.N - window, n + 1) :]))
    ratio = tail / e2 if e2 > 0 else 0.0
    return ErrorEstimate(n=n, value=math.sqrt(e2), tail_ratio=ratio, truncated=e2 > 0 and ratio >= fraction)


def coeff_laplacian_map(table: CoefficientTable) -> CoefficientTable:
    """Coefficients of Delta f at mu + 2 through degree N - 2, read off those of f."""
    if table.N < 2:
        raise ParameterError("the Laplacian map needs N >= 2")
    d, mu = table.d, table.mu
    coeffs: dict[Key, float] = {}
    norms: dict[Key, float] = {}
    for n in range(table.N - 1):
        for j in range(n // 2 + 1):
            for nu in harmonic_indices(d, n - 2 * j):
                source = table.coefficient(n + 2, j + 1, nu)
                coeffs[(n, j, nu)] = float(kappa(n + 2 - j - 1, mu, d)) * source
                norms[(n, j, nu)] = float(h_norm(mu + 2, n, j, d))
    energy = float(sum(c * c * norms[k] for k, c in coeffs.items()))
    return CoefficientTable(d, mu + 2, table.N - 2, coeffs, norms, energy, None, "laplacian", table.sphere_h)


def coeff_beltrami_map(table: CoefficientTable) -> CoefficientTable:
    coeffs = {key: beltrami_eigen(key[0], key[1], table.d) * c for key, c in table.coeffs.items()}
    energy = float(sum(c * c * table.h[k] for k, c in coeffs.items()))
    return CoefficientTable(table.d, table.mu, table.N, coeffs, dict(table.h), energy, None, "beltrami", table.sphere_h)


def h_ratio(mu, s: int, j: int, m: int, d: int):
    """h_{j,m}^mu / h_{j-s,m-2s}^{mu+2s}, taken literally from the norm formula."""
    if s < 0 or j < s or m < 2 * s:
        raise ParameterError(f"h_ratio needs j >= s >= 0 and m >= 2s, got s={s}, j={j}, m={m}")
    mu = mu if isinstance(mu, float) else as_rational(mu)
    return h_norm(mu, m, j, d) / h_norm(mu + 2 * s, m - 2 * s, j - s, d)


def h_ratio_printed(mu, s: int, j: int, m: int, d: int):
    """The closed product often quoted for h_ratio; it lacks a factor
    (m - j + mu + d/2)/(m - j + s + mu + d/2) against the literal quotient."""
    mu = mu if isinstance(mu, float) else as_rational(mu)
    half = Fraction(d, 2)
    num = pochhammer(mu + 1, 2 * s) * pochhammer(m - j - s + half, s) * pochhammer(mu + m - j + half + 1, s)
    den = pochhammer(mu + half + 1, 2 * s) * pochhammer(Fraction(j - s + 1), s) * pochhammer(j + mu + 1, s)
    return num / den


# exact path ---------------------------------------------------------------


def exact_coefficients(f: ExactPoly, mu, N: int | None = None) -> dict[BallBasisIndex, Fraction]:
    """Coefficients of a polynomial against the unnormalised basis, computed by exact moments."""
    mu = as_rational(mu)
    N = f.degree if N is None else N
    out: dict[BallBasisIndex, Fraction] = {}
    for n in range(max(N, 0) + 1):
        for idx in ball_indices(n, f.dim, mu):
            value = exact_inner_product(f, ball_basis_raw(idx), mu)
            if value:
                out[idx] = value / raw_norm(idx)
    return out


def exact_partial_sum(f: ExactPoly, mu, n: int) -> ExactPoly:
    result = ExactPoly.zero(f.dim)
    for idx, c in exact_coefficients(f, mu, n).items():
        result = result + ball_basis_raw(idx) * c
    return result


def commuting_check(f: ExactPoly, mu, n: int, axes: int | tuple[int, int]) -> ExactPoly:
    """d_i S_n^mu f - S_{n-1}^{mu+1} d_i f, or D_{i,j} S_n^mu f - S_n^mu D_{i,j} f for a pair of axes."""
    mu = as_rational(mu)
    if isinstance(axes, tuple):
        i, j = axes
        return angular_derivative(exact_partial_sum(f, mu, n), i, j) - exact_partial_sum(
            angular_derivative(f, i, j), mu, n
        )
    if n < 1:
        raise ParameterError("the gradient commuting relation needs n >= 1")
    return exact_partial_sum(f, mu, n).diff(axes) - exact_partial_sum(f.diff(axes), mu + 1, n - 1)


def _raw_coefficient(f: ExactPoly, idx: BallBasisIndex) -> Fraction:
    return exact_inner_product(f, ball_basis_raw(idx), idx.mu) / raw_norm(idx)


def gradient_identity_residual(f: ExactPoly, idx: BallBasisIndex) -> Fraction:
    """h(grad) f_hat - (b_mu/b_{mu+1}) sum_i sum_Q <Q, d_i P>_{mu+1} (d_i f)_hat_Q, unnormalised basis."""
    mu, d = idx.mu, idx.d
    lhs = h_grad(mu, idx.n, idx.j, d) * sphere_norm(idx.nu) * _raw_coefficient(f, idx)
    rhs = Fraction(0)
    if idx.n >= 1:
        p = ball_basis_raw(idx)
        for i in range(1, d + 1):
            dp, df = p.diff(i), f.diff(i)
            for q in ball_indices(idx.n - 1, d, mu + 1):
                overlap = exact_inner_product(ball_basis_raw(q), dp, mu + 1)
                if overlap:
                    rhs += overlap * _raw_coefficient(df, q)
    return lhs - b_ratio(mu, d) * rhs


def angular_identity_residual(f: ExactPoly, idx: BallBasisIndex) -> Fraction:
    """(m-2l)(m-2l+d-2) h f_hat - sum_{i<j} sum_Q <Q, D_{i,j} P>_mu (D_{i,j} f)_hat_Q."""
    mu, d = idx.mu, idx.d
    q_deg = idx.nu.degree
    lhs = q_deg * (q_deg + d - 2) * raw_norm(idx) * _raw_coefficient(f, idx)
    p = ball_basis_raw(idx)
    rhs = Fraction(0)
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            dp, df = angular_derivative(p, i, j), angular_derivative(f, i, j)
            for q in ball_indices(idx.n, d, mu):
                overlap = exact_inner_product(ball_basis_raw(q), dp, mu)
                if overlap:
                    rhs += overlap * _raw_coefficient(df, q)
    return lhs - rhs


def laplacian_map_residual(f: ExactPoly, mu) -> Fraction:
    """Largest gap between exact coefficients of Delta f at mu + 2 and kappa-scaled coefficients of f."""
    mu = as_rational(mu)
    n_top = max(f.degree, 0)
    source = exact_coefficients(f, mu, n_top)
    target = exact_coefficients(laplacian(f), mu + 2, max(n_top - 2, 0))
    worst = Fraction(0)
    for n in range(max(n_top - 1, 0)):
        for idx in ball_indices(n, f.dim, mu + 2):
            up = BallBasisIndex(n + 2, idx.j + 1, idx.nu, mu)
            mapped = kappa(n + 2 - idx.j - 1, mu, f.dim) * source.get(up, Fraction(0))
            worst = max(worst, abs(target.get(idx, Fraction(0)) - mapped))
    return worst


def beltrami_map_residual(f: ExactPoly, mu) -> Fraction:
    mu = as_rational(mu)
    source = exact_coefficients(f, mu)
    target = exact_coefficients(laplace_beltrami(f), mu, max(f.degree, 0))
    worst = Fraction(0)
    for idx in set(source) | set(target):
        mapped = beltrami_eigen(idx.n, idx.j, f.dim) * source.get(idx, Fraction(0))
        worst = max(worst, abs(target.get(idx, Fraction(0)) - mapped))
    return worst
