from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import gammaln

from ..errors import ParameterError, QuadratureError
from .polyalg import ExactPoly, as_rational, pochhammer

logger = logging.getLogger(__name__)

__all__ = [
    "GaussRule1D",
    "JacobiParams",
    "chebyshev_t_exact",
    "chebyshev_u_exact",
    "gauss_jacobi",
    "gegenbauer_eval",
    "gegenbauer_exact",
    "jacobi_contiguous",
    "jacobi_deriv",
    "jacobi_eval",
    "jacobi_exact",
    "jacobi_mass",
    "pochhammer",
]


@dataclass(frozen=True)
class JacobiParams:
    alpha: float | Fraction
    beta: float | Fraction

    def __post_init__(self):
        if self.alpha <= -1 or self.beta <= -1:
            raise ParameterError(f"Jacobi parameters must exceed -1, got ({self.alpha}, {self.beta})")

    def shifted(self, da, db) -> "JacobiParams":
        return JacobiParams(self.alpha + da, self.beta + db)

    def as_float(self) -> tuple[float, float]:
        return float(self.alpha), float(self.beta)


@dataclass(frozen=True, eq=False)
class GaussRule1D:
    nodes: np.ndarray
    weights: np.ndarray
    exactness: int
    params: JacobiParams = field(compare=False)

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _jacobi_recurrence(n: int, a, b, t, one):
    """Three-term recurrence for P_n^{(a,b)} over any ring where ``t`` lives.

    ``one`` is the unit of that ring; the coefficients are built from ``a`` and
    ``b`` so exact parameters give exact results.
    """
    p0 = one
    if n == 0:
        return p0
    p1 = t * ((a + b + 2) / 2) + one * ((a - b) / 2)
    for k in range(2, n + 1):
        c = 2 * k + a + b
        a1 = 2 * k * (k + a + b) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 2) * (c - 1) * c
        a4 = 2 * (k + a - 1) * (k + b - 1) * c
        p0, p1 = p1, (p1 * a2 + t * p1 * a3 - p0 * a4) * (1 / a1)
    return p1


def jacobi_eval(n: int, params: JacobiParams, t) -> np.ndarray | float:
    """P_n^{(alpha,beta)}(t) by forward recurrence; ``t`` may be an array."""
    if n < 0:
        raise ParameterError(f"degree must be >= 0, got {n}")
    a, b = params.as_float()
    t_arr = np.asarray(t, dtype=float)
    value = _jacobi_recurrence(n, a, b, t_arr, np.ones_like(t_arr))
    return float(value) if np.ndim(value) == 0 else value


@lru_cache(maxsize=None)
def jacobi_exact(n: int, alpha, beta) -> ExactPoly:
    """P_n^{(alpha,beta)} as an exact polynomial in one variable."""
    if n < 0:
        raise ParameterError(f"degree must be >= 0, got {n}")
    a, b = as_rational(alpha), as_rational(beta)
    JacobiParams(a, b)
    t = ExactPoly.variable(1, 1)
    return _jacobi_recurrence(n, a, b, t, ExactPoly.constant(1, 1))


def jacobi_deriv(n: int, params: JacobiParams, t):
    """d/dt P_n^{(alpha,beta)}(t) = (n + alpha + beta + 1)/2 P_{n-1}^{(alpha+1,beta+1)}(t)."""
    if n <= 0:
        return 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else 0.0
    a, b = params.as_float()
    return (n + a + b + 1) / 2 * jacobi_eval(n - 1, params.shifted(1, 1), t)


def jacobi_second_deriv(n: int, params: JacobiParams, t):
    if n <= 1:
        return 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else 0.0
    a, b = params.as_float()
    return (n + a + b + 1) * (n + a + b + 2) / 4 * jacobi_eval(n - 2, params.shifted(2, 2), t)


def jacobi_deriv_exact(n: int, alpha, beta) -> ExactPoly:
    if n <= 0:
        return ExactPoly.zero(1)
    a, b = as_rational(alpha), as_rational(beta)
    return jacobi_exact(n - 1, a + 1, b + 1) * ((n + a + b + 1) / 2)


def jacobi_contiguous(kind: str, n: int, params: JacobiParams, t):
    """beta P_n^{(a,b)}(t) + (1 + t) P_n^{(a,b)}'(t), which equals (beta + n) P_n^{(a+1,b-1)}(t)."""
    if kind != "raise_mixed":
        raise ParameterError(f"unknown contiguous relation {kind!r}")
    b = float(params.beta)
    t_arr = np.asarray(t, dtype=float)
    return b * jacobi_eval(n, params, t_arr) + (1 + t_arr) * jacobi_deriv(n, params, t_arr)


def jacobi_contiguous_rhs(n: int, params: JacobiParams, t):
    a, b = params.as_float()
    t_arr = np.asarray(t, dtype=float)
    # beta - 1 may fall to -1 or below, outside JacobiParams
    return (b + n) * _jacobi_recurrence(n, a + 1, b - 1, t_arr, np.ones_like(t_arr))


def jacobi_contiguous_exact(n: int, alpha, beta) -> tuple[ExactPoly, ExactPoly]:
    """Both sides of the mixed contiguous relation as exact polynomials."""
    a, b = as_rational(alpha), as_rational(beta)
    t = ExactPoly.variable(1, 1)
    lhs = jacobi_exact(n, a, b) * b + (t + 1) * jacobi_deriv_exact(n, a, b)
    rhs = _jacobi_recurrence(n, a + 1, b - 1, t, ExactPoly.constant(1, 1)) * (b + n)
    return lhs, rhs


def jacobi_ode_residual(n: int, params: JacobiParams, t):
    """(1-t^2) y'' + (beta - alpha - (alpha+beta+2) t) y' + n(n+alpha+beta+1) y at ``t``."""
    a, b = params.as_float()
    t_arr = np.asarray(t, dtype=float)
    y = jacobi_eval(n, params, t_arr)
    dy = jacobi_deriv(n, params, t_arr)
    ddy = jacobi_second_deriv(n, params, t_arr)
    return (1 - t_arr**2) * ddy + (b - a - (a + b + 2) * t_arr) * dy + n * (n + a + b + 1) * y


def jacobi_ode_residual_exact(n: int, alpha, beta) -> ExactPoly:
    a, b = as_rational(alpha), as_rational(beta)
    t = ExactPoly.variable(1, 1)
    y = jacobi_exact(n, a, b)
    dy = y.diff(1)
    return (1 - t * t) * dy.diff(1) + (b - a - (a + b + 2) * t) * dy + y * (n * (n + a + b + 1))


def _gegenbauer_recurrence(n: int, lam, u, one):
    if n < 0:
        return one * 0
    c0 = one
    if n == 0:
        return c0
    c1 = u * (2 * lam)
    for k in range(2, n + 1):
        c0, c1 = c1, (u * c1 * (2 * (k + lam - 1)) - c0 * (k + 2 * lam - 2)) / k
    return c1


def gegenbauer_eval(n: int, lam, u):
    """C_n^lambda(u) by the three-term recurrence; C_n with n < 0 is 0."""
    if lam <= Fraction(-1, 2):
        raise ParameterError(f"Gegenbauer parameter must exceed -1/2, got {lam}")
    u_arr = np.asarray(u, dtype=float)
    value = _gegenbauer_recurrence(n, float(lam), u_arr, np.ones_like(u_arr))
    return float(value) if np.ndim(value) == 0 else value


@lru_cache(maxsize=None)
def gegenbauer_exact(n: int, lam) -> ExactPoly:
    lam = as_rational(lam)
    if lam <= Fraction(-1, 2):
        raise ParameterError(f"Gegenbauer parameter must exceed -1/2, got {lam}")
    return _gegenbauer_recurrence(n, lam, ExactPoly.variable(1, 1), ExactPoly.constant(1, 1))


@lru_cache(maxsize=None)
def chebyshev_t_exact(n: int) -> ExactPoly:
    t = ExactPoly.variable(1, 1)
    prev, cur = ExactPoly.constant(1, 1), t
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, 2 * t * cur - prev
    return cur


@lru_cache(maxsize=None)
def chebyshev_u_exact(n: int) -> ExactPoly:
    if n < 0:
        return ExactPoly.zero(1)
    t = ExactPoly.variable(1, 1)
    prev, cur = ExactPoly.constant(1, 1), 2 * t
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, 2 * t * cur - prev
    return cur


def gegenbauer_identity_residuals(n: int, lam, u) -> dict[str, object]:
    """Residuals of the three Gegenbauer relations used by the harmonic recursions.

    Works for exact (``u`` an ``ExactPoly`` variable, ``lam`` a Fraction) and
    floating (``u`` an array) arguments alike.
    """
    if isinstance(u, ExactPoly):
        lam = as_rational(lam)

        def c(k, l):
            return gegenbauer_exact(k, l) if k >= 0 else ExactPoly.zero(1)

    else:
        lam = float(lam)

        def c(k, l):
            return gegenbauer_eval(k, l, u) if k >= 0 else 0.0 * np.asarray(u, dtype=float)

    lowering = c(n, lam) * n - u * c(n - 1, lam + 1) * (2 * lam) + c(n - 2, lam + 1) * (2 * lam)
    derivative = (
        u * c(n, lam) * n
        + (1 - u * u) * c(n - 1, lam + 1) * (2 * lam)
        - c(n - 1, lam) * (n + 2 * lam - 1)
    )
    ratio = lam / (n + lam)
    raising = c(n, lam) + c(n - 2, lam + 1) * ratio - c(n, lam + 1) * ratio
    return {"lowering": lowering, "derivative": derivative, "raising": raising}


def jacobi_mass(params: JacobiParams) -> float:
    """Total mass 2^{a+b+1} B(a+1, b+1) of the Jacobi weight."""
    a, b = params.as_float()
    return float(np.exp((a + b + 1) * np.log(2.0) + gammaln(a + 1) + gammaln(b + 1) - gammaln(a + b + 2)))


def _jacobi_matrix(k: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(k, dtype=float)
    diag = np.empty(k)
    diag[0] = (b - a) / (a + b + 2)
    if k > 1:
        m = n[1:]
        s = 2 * m + a + b
        diag[1:] = (b * b - a * a) / (s * (s + 2))
    off = np.empty(max(k - 1, 0))
    if k > 1:
        off[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
        if k > 2:
            m = n[2:]
            s = 2 * m + a + b
            off[1:] = 4 * m * (m + a) * (m + b) * (m + a + b) / (s * s * (s + 1) * (s - 1))
        off = np.sqrt(off)
    return diag, off


def _christoffel_weights(nodes: np.ndarray, diag: np.ndarray, off: np.ndarray, mass: float) -> np.ndarray:
    """1 / sum_k p_k(t)^2 over the orthonormal polynomials of the Jacobi matrix.

    Small endpoint weights keep full relative accuracy, unlike squared
    eigenvector components.
    """
    prev = np.zeros_like(nodes)
    cur = np.full_like(nodes, 1.0 / np.sqrt(mass))
    total = cur * cur
    for k in range(len(nodes) - 1):
        nxt = ((nodes - diag[k]) * cur - (off[k - 1] * prev if k else 0.0)) / off[k]
        prev, cur = cur, nxt
        total = total + cur * cur
    return 1.0 / total


@lru_cache(maxsize=256)
def gauss_jacobi(k: int, params: JacobiParams) -> GaussRule1D:
    """k-point Gauss rule for (1-t)^alpha (1+t)^beta on [-1, 1] (Golub-Welsch)."""
    if k < 1:
        raise ParameterError(f"a Gauss rule needs at least one node, got {k}")
    a, b = params.as_float()
    diag, off = _jacobi_matrix(k, a, b)
    try:
        nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    except LinAlgError as exc:
        logger.exception("Jacobi matrix eigensolve failed for k=%s params=%s", k, params)
        raise QuadratureError(f"Gauss-Jacobi eigensolve did not converge for k={k}, {params}") from exc
    weights = _christoffel_weights(nodes, diag, off, jacobi_mass(params))
    if not np.all(np.isfinite(nodes)) or np.any(weights <= 0):
        raise QuadratureError(f"Gauss-Jacobi rule for k={k}, {params} has invalid nodes or weights")
    if k > 1 and np.any(np.diff(nodes) <= 0):
        raise QuadratureError(f"Gauss-Jacobi nodes for k={k} are not strictly increasing")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    logger.debug("built %s-point Gauss-Jacobi rule alpha=%s beta=%s", k, a, b)
    return GaussRule1D(nodes=nodes, weights=weights, exactness=2 * k - 1, params=params)
