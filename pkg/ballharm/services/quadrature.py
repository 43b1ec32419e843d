from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
from scipy.special import gammaln

from ..errors import ParameterError, QuadratureError
from .orthopoly1d import GaussRule1D, JacobiParams, gauss_jacobi
from .polyalg import RationalLike, ball_monomial_moment, check_mu, sphere_monomial_moment
from .spherical import HarmonicEvaluator

logger = logging.getLogger(__name__)

ASSEMBLY_CHECK_DEGREE = 4
MOMENT_RTOL = 1e-12
MOMENT_ATOL = 1e-14
FACTOR_RTOL = 1e-11

Evaluatable = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SphereRule:
    """Positive rule on S^{d-1}; weights sum to 1 (normalised surface measure)."""

    d: int
    points: np.ndarray
    weights: np.ndarray
    exact_degree: int
    polar: GaussRule1D | None = None
    lower: SphereRule | None = None

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))


@dataclass(frozen=True, eq=False)
class BallQuadrature:
    """Product rule for b_mu int_B f (1 - |x|^2)^mu dx.

    Nodes are ordered radius-major: node k * S + s sits at radii[k] * sphere.points[s].
    """

    d: int
    mu: Fraction
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int
    radii: np.ndarray
    radial_weights: np.ndarray
    sphere: SphereRule

    @property
    def size(self) -> int:
        return len(self.weights)

    def evaluate(self, f: Evaluatable) -> np.ndarray:
        values = np.asarray(f(self.nodes), dtype=float)
        if values.shape == ():
            values = np.full(self.size, float(values))
        if values.shape != (self.size,):
            raise ParameterError(f"function returned shape {values.shape}, expected ({self.size},)")
        return values

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))

    def grid(self, values) -> np.ndarray:
        """Reshape node values to (radial node, sphere node)."""
        return np.asarray(values).reshape(len(self.radii), len(self.sphere.weights))


def _check_gauss_rule(rule: GaussRule1D) -> float:
    """Largest relative error over the moments of s = (1 + t)/2 the rule must integrate exactly."""
    a, b = rule.params.as_float()
    s = (1 + rule.nodes) / 2
    worst = 0.0
    for k in range(rule.exactness + 1):
        exact = math.exp((a + b + 1) * math.log(2.0) + gammaln(k + b + 1) + gammaln(a + 1) - gammaln(k + a + b + 2))
        approx = float(np.sum(rule.weights * s**k))
        worst = max(worst, abs(approx - exact) / exact)
    return worst


def _certify_factor(rule: GaussRule1D, label: str) -> None:
    worst = _check_gauss_rule(rule)
    if worst > FACTOR_RTOL:
        raise QuadratureError(f"{label} Gauss rule failed certification (relative error {worst:.3e})")


def _check_circle(weights: np.ndarray, theta: np.ndarray, degree: int) -> None:
    for k in range(1, degree + 1):
        drift = abs(np.sum(weights * np.exp(1j * k * theta)))
        if drift > 1e-13:
            raise QuadratureError(f"circle rule of degree {degree} fails on frequency {k} ({drift:.3e})")


@lru_cache(maxsize=64)
def build_sphere_rule(d: int, degree: int) -> SphereRule:
    """Trapezoid rule on the circle, Gauss-Gegenbauer in x_d times S^{d-2} above it."""
    if d < 2:
        raise ParameterError(f"sphere rules need d >= 2, got {d}")
    if degree < 0:
        raise ParameterError(f"degree must be >= 0, got {degree}")
    if d == 2:
        count = degree + 1
        theta = 2 * np.pi * np.arange(count) / count
        weights = np.full(count, 1.0 / count)
        _check_circle(weights, theta, degree)
        points = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return SphereRule(2, points, weights, degree)
    lower = build_sphere_rule(d - 1, degree)
    half = Fraction(d - 3, 2)
    factor = gauss_jacobi(max(1, math.ceil((degree + 1) / 2)), JacobiParams(half, half))
    _certify_factor(factor, f"S^{d - 1} polar")
    u = factor.nodes
    ring = np.sqrt(np.clip(1 - u**2, 0.0, None))
    points = np.concatenate(
        [np.column_stack([ring[k] * lower.points, np.full(len(lower.weights), u[k])]) for k in range(len(u))]
    )
    weights = np.concatenate([factor.weights[k] * lower.weights for k in range(len(u))])
    weights = weights / np.sum(weights)
    return SphereRule(d, points, weights, degree, polar=factor, lower=lower)


def monomials(d: int, max_degree: int) -> Iterator[tuple[int, ...]]:
    for total in range(max_degree + 1):
        yield from _compositions(total, d)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _within(approx: np.ndarray, exact: np.ndarray, mask: np.ndarray) -> tuple[float, tuple[int, ...] | None]:
    """Worst absolute error over ``mask`` and the first entry outside tolerance, if any."""
    error = np.where(mask, np.abs(approx - exact), 0.0)
    bad = np.argwhere(error > MOMENT_RTOL * np.abs(exact) + MOMENT_ATOL)
    return float(np.max(error, initial=0.0)), (tuple(int(k) for k in bad[0]) if len(bad) else None)


def _circle_moments(top: int) -> np.ndarray:
    """(1/2pi) int cos^a sin^b for 0 <= a, b <= top."""
    a = np.arange(top + 1)[:, None]
    b = np.arange(top + 1)[None, :]
    even = (a % 2 == 0) & (b % 2 == 0)
    logs = gammaln((a + 1) / 2) + gammaln((b + 1) / 2) - gammaln((a + b) / 2 + 1) - math.log(math.pi)
    return np.where(even, np.exp(logs), 0.0)


def _polar_moments(d: int, top: int) -> np.ndarray:
    """int (1-u^2)^{a/2} u^c against the normalised weight (1-u^2)^{(d-3)/2}, for even a."""
    a = np.arange(top + 1)[:, None]
    c = np.arange(top + 1)[None, :]
    logs = (
        gammaln((c + 1) / 2) + gammaln((d - 1 + a) / 2) - gammaln((c + d + a) / 2)
        - (gammaln(0.5) + gammaln((d - 1) / 2) - gammaln(d / 2))
    )
    return np.where(c % 2 == 0, np.exp(logs), 0.0)


def certify_sphere_rule(rule: SphereRule, max_degree: int | None = None) -> float:
    """Certify every monomial of degree <= ``max_degree`` (default: the exact degree).

    On S^{d-1} = {(sqrt(1-u^2) eta, u)} the rule sum of xi^alpha is the polar factor sum of
    (1-u^2)^{|alpha'|/2} u^{alpha_d} times the lower rule sum of eta^{alpha'}, and the exact
    moment splits the same way. Odd |alpha'| has a vanishing lower moment, so certifying the
    even-power polar table and the lower rule to the same degree covers every monomial.
    """
    top = rule.exact_degree if max_degree is None else min(max_degree, rule.exact_degree)
    mask = np.add.outer(np.arange(top + 1), np.arange(top + 1)) <= top
    if rule.d == 2:
        cos, sin = rule.points[:, 0], rule.points[:, 1]
        powers = np.arange(top + 1)[:, None]
        approx = (cos[None, :] ** powers * rule.weights) @ (sin[None, :] ** powers).T
        worst, bad = _within(approx, _circle_moments(top), mask)
        if bad is not None:
            raise QuadratureError(f"circle rule of degree {rule.exact_degree} fails on xi^{bad}")
        return worst
    if rule.polar is None or rule.lower is None:
        raise QuadratureError(f"sphere rule d={rule.d} carries no product structure to certify")
    u = rule.polar.nodes
    w = rule.polar.weights / rule.polar.mass
    ring = np.sqrt(np.clip(1 - u**2, 0.0, None))
    powers = np.arange(top + 1)[:, None]
    approx = (ring[None, :] ** powers * w) @ (u[None, :] ** powers).T
    even_ring = (np.arange(top + 1) % 2 == 0)[:, None]
    worst, bad = _within(approx, _polar_moments(rule.d, top), mask & even_ring)
    if bad is not None:
        raise QuadratureError(f"polar factor of the S^{rule.d - 1} rule fails on (ring^{bad[0]}, u^{bad[1]})")
    return worst + certify_sphere_rule(rule.lower, top)


def _radial_moments(mu: Fraction, d: int, top: int) -> np.ndarray:
    """E[r^{2m}] = (d/2)_m / (d/2 + mu + 1)_m for 2m <= top."""
    m = np.arange(top // 2 + 1)
    mu = float(mu)
    return np.exp(gammaln(m + d / 2) - gammaln(d / 2) - gammaln(m + d / 2 + mu + 1) + gammaln(d / 2 + mu + 1))


def _check_assembled(rule: BallQuadrature, degree: int) -> float:
    """Direct moments of the assembled nodes for the low-degree monomials."""
    worst = 0.0
    for alpha in monomials(rule.d, degree):
        values = np.prod(rule.nodes ** np.asarray(alpha), axis=1)
        approx = rule.integrate(values)
        exact = float(ball_monomial_moment(alpha, rule.mu, rule.d))
        error = abs(approx - exact)
        if error > MOMENT_RTOL * abs(exact) + MOMENT_ATOL:
            raise QuadratureError(
                f"rule d={rule.d} mu={rule.mu} degree={rule.exact_degree} fails on x^{alpha}: "
                f"{approx!r} vs {exact!r}"
            )
        worst = max(worst, error)
    return worst


def certify_rule(rule: BallQuadrature, max_degree: int | None = None) -> float:
    """Certify every monomial moment up to ``max_degree`` (default: the exact degree).

    The rule value of x^alpha is the radial sum of r^{|alpha|} times the sphere sum of
    xi^alpha, so the radial moments and the sphere rule are certified separately over the
    whole range; the assembled nodes are checked directly at low degree.
    """
    top = rule.exact_degree if max_degree is None else min(max_degree, rule.exact_degree)
    even = 2 * np.arange(top // 2 + 1)
    approx = (rule.radii[None, :] ** even[:, None]) @ rule.radial_weights
    exact = _radial_moments(rule.mu, rule.d, top)
    worst, bad = _within(approx, exact, np.ones_like(exact, dtype=bool))
    if bad is not None:
        raise QuadratureError(
            f"rule d={rule.d} mu={rule.mu} degree={rule.exact_degree} fails on |x|^{even[bad[0]]}"
        )
    worst += certify_sphere_rule(rule.sphere, top)
    return worst + _check_assembled(rule, min(top, ASSEMBLY_CHECK_DEGREE))


@lru_cache(maxsize=16)
def _build_ball_rule(d: int, mu: Fraction, degree: int, certify_degree: int | None) -> BallQuadrature:
    radial = gauss_jacobi(max(1, math.ceil((degree + 2) / 2)), JacobiParams(mu, Fraction(d - 2, 2)))
    _certify_factor(radial, "radial")
    sphere = build_sphere_rule(d, degree)
    radii = np.sqrt((1 + radial.nodes) / 2)
    radial_weights = radial.weights / np.sum(radial.weights)
    nodes = (radii[:, None, None] * sphere.points[None, :, :]).reshape(-1, d)
    weights = (radial_weights[:, None] * sphere.weights[None, :]).reshape(-1)
    for array in (nodes, weights, radii, radial_weights):
        array.setflags(write=False)
    rule = BallQuadrature(d, mu, nodes, weights, degree, radii, radial_weights, sphere)
    worst = certify_rule(rule, certify_degree)
    logger.debug(
        "ball rule d=%s mu=%s degree=%s: %s nodes, worst moment error %.2e", d, mu, degree, rule.size, worst
    )
    return rule


def build_ball_rule(d: int, mu: RationalLike, degree: int, certify_degree: int | None = None) -> BallQuadrature:
    """Certified rule exact for polynomials of total degree <= ``degree`` on (B^d, w_mu).

    Every monomial up to ``degree`` is certified unless ``certify_degree`` caps the check.
    """
    if d < 2:
        raise ParameterError(f"ball rules need d >= 2, got {d}")
    if degree < 0:
        raise ParameterError(f"degree must be >= 0, got {degree}")
    cap = None if certify_degree is None else int(certify_degree)
    return _build_ball_rule(d, check_mu(mu), int(degree), cap)


def inner_product(f: Evaluatable, g: Evaluatable, rule: BallQuadrature) -> float:
    """<f, g>_mu by the rule; exact whenever f g is a polynomial of degree <= exact_degree."""
    return rule.integrate(rule.evaluate(f) * rule.evaluate(g))


def sphere_norms(d: int, n: int) -> np.ndarray:
    """Numeric h for every index of harmonic_indices(d, n), via a degree-2n sphere rule."""
    rule = build_sphere_rule(d, 2 * n)
    values = HarmonicEvaluator(rule.points).raw(n)
    return rule.weights @ (values * values)
