from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from types import MappingProxyType
from typing import Iterable, Mapping, Union

import numpy as np

from ..errors import ParameterError

Exponent = tuple[int, ...]
Scalar = Union[int, Fraction]
RationalLike = Union[int, Fraction, str, float]


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ``value`` to an exact ``Fraction``.

    Strings such as ``"1/2"`` or ``"0.5"`` are parsed exactly; floats keep their
    binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"not a rational value: {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"not a rational value: {value!r}") from exc


def pochhammer(a, n: int):
    """Rising factorial (a)_n; keeps the type of ``a``."""
    if n < 0:
        raise ParameterError(f"pochhammer order must be >= 0, got {n}")
    result = a * 0 + 1
    for k in range(n):
        result *= a + k
    return result


def _grlex(alpha: Exponent) -> tuple[int, Exponent]:
    return sum(alpha), alpha


class ExactPoly:
    """Multivariate polynomial in ``dim`` variables with ``Fraction`` coefficients.

    Terms are kept in graded lexicographic order of their exponents and zero
    coefficients are never stored, so equality is equality of term maps.
    """

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Exponent, Scalar] | Iterable[tuple[Exponent, Scalar]] | None = None):
        if dim < 1:
            raise ParameterError(f"dimension must be positive, got {dim}")
        acc: dict[Exponent, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for alpha, coeff in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or any(a < 0 for a in alpha):
                raise ParameterError(f"invalid exponent {alpha} for dimension {dim}")
            acc[alpha] = acc.get(alpha, Fraction(0)) + as_rational(coeff)
        self.dim = dim
        self._terms = _normalized(acc)
        self._hash: int | None = None

    @classmethod
    def _raw(cls, dim: int, acc: dict[Exponent, Fraction]) -> "ExactPoly":
        poly = object.__new__(cls)
        poly.dim = dim
        poly._terms = _normalized(acc)
        poly._hash = None
        return poly

    @classmethod
    def zero(cls, dim: int) -> "ExactPoly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: RationalLike = 1) -> "ExactPoly":
        return cls(dim, {(0,) * dim: as_rational(value)})

    @classmethod
    def variable(cls, dim: int, axis: int) -> "ExactPoly":
        _check_axis(dim, axis)
        alpha = [0] * dim
        alpha[axis - 1] = 1
        return cls(dim, {tuple(alpha): 1})

    @classmethod
    def monomial(cls, alpha: Exponent, coeff: RationalLike = 1) -> "ExactPoly":
        return cls(len(alpha), {tuple(alpha): as_rational(coeff)})

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(alpha) for alpha in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self) -> bool:
        return len({sum(alpha) for alpha in self._terms}) <= 1

    def coefficient(self, alpha: Exponent) -> Fraction:
        return self._terms.get(tuple(alpha), Fraction(0))

    def _coerce(self, other) -> "ExactPoly":
        if isinstance(other, ExactPoly):
            if other.dim != self.dim:
                raise ParameterError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return ExactPoly.constant(self.dim, other)

    def __add__(self, other) -> "ExactPoly":
        other = self._coerce(other)
        acc = dict(self._terms)
        for alpha, coeff in other._terms.items():
            acc[alpha] = acc.get(alpha, Fraction(0)) + coeff
        return ExactPoly._raw(self.dim, acc)

    __radd__ = __add__

    def __neg__(self) -> "ExactPoly":
        return ExactPoly._raw(self.dim, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> "ExactPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ExactPoly":
        if not isinstance(other, ExactPoly):
            scale = as_rational(other)
            return ExactPoly._raw(self.dim, {a: c * scale for a, c in self._terms.items()})
        other = self._coerce(other)
        acc: dict[Exponent, Fraction] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                acc[key] = acc.get(key, Fraction(0)) + ca * cb
        return ExactPoly._raw(self.dim, acc)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactPoly":
        divisor = as_rational(other)
        if divisor == 0:
            raise ZeroDivisionError("division of a polynomial by zero")
        return self * (1 / divisor)

    def __pow__(self, k: int) -> "ExactPoly":
        if k < 0:
            raise ParameterError("negative powers are not polynomials")
        result = ExactPoly.constant(self.dim, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactPoly):
            return self.dim == other.dim and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == ExactPoly.constant(self.dim, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, tuple(self._terms.items())))
        return self._hash

    def diff(self, axis: int) -> "ExactPoly":
        _check_axis(self.dim, axis)
        k = axis - 1
        acc: dict[Exponent, Fraction] = {}
        for alpha, coeff in self._terms.items():
            if alpha[k] == 0:
                continue
            lowered = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1:]
            acc[lowered] = coeff * alpha[k]
        return ExactPoly._raw(self.dim, acc)

    def embed(self, dim: int) -> "ExactPoly":
        """View the polynomial as one in ``dim >= self.dim`` variables (new axes trailing)."""
        if dim < self.dim:
            raise ParameterError(f"cannot embed dimension {self.dim} into {dim}")
        pad = (0,) * (dim - self.dim)
        return ExactPoly._raw(dim, {alpha + pad: c for alpha, c in self._terms.items()})

    def permute_axes(self, axes: Iterable[int]) -> "ExactPoly":
        """Return q with q(x) = p(x_{axes[0]}, ..., x_{axes[d-1]}) (1-based axes)."""
        axes = tuple(axes)
        if sorted(axes) != list(range(1, self.dim + 1)):
            raise ParameterError(f"{axes} is not a permutation of the axes")
        acc: dict[Exponent, Fraction] = {}
        for alpha, coeff in self._terms.items():
            moved = [0] * self.dim
            for position, axis in enumerate(axes):
                moved[axis - 1] += alpha[position]
            acc[tuple(moved)] = coeff
        return ExactPoly._raw(self.dim, acc)

    def evaluate(self, points) -> np.ndarray:
        """Evaluate in floating point at ``points`` of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise ParameterError(f"points have {pts.shape[-1]} coordinates, polynomial has {self.dim}")
        out = np.zeros(pts.shape[:-1])
        if not self._terms:
            return out
        top = max(max(alpha) for alpha in self._terms)
        powers = [np.stack([pts[..., k] ** e for e in range(top + 1)]) for k in range(self.dim)]
        for alpha, coeff in self._terms.items():
            term = np.full(pts.shape[:-1], float(coeff))
            for k, e in enumerate(alpha):
                if e:
                    term = term * powers[k][e]
            out = out + term
        return out

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for alpha, coeff in sorted(self._terms.items(), key=lambda item: _grlex(item[0]), reverse=True):
            factors = [f"x{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(alpha) if e]
            mono = "*".join(factors)
            if not mono:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(mono)
            elif coeff == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{coeff}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _normalized(acc: dict[Exponent, Fraction]) -> dict[Exponent, Fraction]:
    return {alpha: acc[alpha] for alpha in sorted(acc, key=_grlex) if acc[alpha] != 0}


def _check_axis(dim: int, axis: int) -> None:
    if not 1 <= axis <= dim:
        raise ParameterError(f"axis {axis} out of range 1..{dim}")


def _check_same_dim(p: ExactPoly, q: ExactPoly) -> None:
    if p.dim != q.dim:
        raise ParameterError(f"dimension mismatch: {p.dim} vs {q.dim}")


def poly_arith(p: ExactPoly, q: ExactPoly, op: str) -> ExactPoly:
    _check_same_dim(p, q)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ParameterError(f"unknown polynomial operation {op!r}")


def poly_diff(p: ExactPoly, axis: int) -> ExactPoly:
    return p.diff(axis)


def gradient(p: ExactPoly) -> tuple[ExactPoly, ...]:
    return tuple(p.diff(i) for i in range(1, p.dim + 1))


def laplacian(p: ExactPoly) -> ExactPoly:
    result = ExactPoly.zero(p.dim)
    for i in range(1, p.dim + 1):
        result = result + p.diff(i).diff(i)
    return result


def angular_derivative(p: ExactPoly, i: int, j: int) -> ExactPoly:
    """D_{i,j} p = x_i d_j p - x_j d_i p."""
    _check_axis(p.dim, i)
    _check_axis(p.dim, j)
    if i == j:
        raise ParameterError("angular derivative needs two distinct axes")
    xi = ExactPoly.variable(p.dim, i)
    xj = ExactPoly.variable(p.dim, j)
    return xi * p.diff(j) - xj * p.diff(i)


def laplace_beltrami(p: ExactPoly) -> ExactPoly:
    """Sum of D_{i,j}^2 over i < j."""
    result = ExactPoly.zero(p.dim)
    for i in range(1, p.dim + 1):
        for j in range(i + 1, p.dim + 1):
            result = result + angular_derivative(angular_derivative(p, i, j), i, j)
    return result


def euler_derivative(p: ExactPoly) -> ExactPoly:
    """x . grad p; scales each homogeneous part by its degree."""
    return ExactPoly._raw(p.dim, {alpha: c * sum(alpha) for alpha, c in p.items()})


def norm_squared(dim: int) -> ExactPoly:
    return ExactPoly(dim, {tuple(2 if k == i else 0 for k in range(dim)): 1 for i in range(dim)})


def compose(univariate: ExactPoly, argument: ExactPoly) -> ExactPoly:
    """Evaluate a polynomial in one variable at a multivariate ``argument`` (Horner)."""
    if univariate.dim != 1:
        raise ParameterError("compose expects a univariate outer polynomial")
    degree = univariate.degree
    result = ExactPoly.zero(argument.dim)
    for k in range(degree, -1, -1):
        result = result * argument + univariate.coefficient((k,))
    return result


def _gamma_half(q: Fraction) -> tuple[Fraction, int]:
    """Gamma(q) for positive integer or half-integer q as (rational, power of sqrt(pi))."""
    if q <= 0 or q.denominator not in (1, 2):
        raise ParameterError(f"gamma argument {q} is not a positive (half-)integer")
    if q.denominator == 1:
        return Fraction(factorial(int(q) - 1)), 0
    return pochhammer(Fraction(1, 2), int(q - Fraction(1, 2))), 1


@lru_cache(maxsize=None)
def _sphere_moment(alpha: Exponent, d: int) -> Fraction:
    if any(a % 2 for a in alpha):
        return Fraction(0)
    half = [a // 2 for a in alpha]
    value, power = _gamma_half(Fraction(d, 2))
    for b in half:
        c, e = _gamma_half(Fraction(2 * b + 1, 2))
        value *= c
        power += e
    c, e = _gamma_half(Fraction(sum(half)) + Fraction(d, 2))
    value /= c
    # Gamma(1/2)^d in the surface area normalisation
    power -= e + d
    if power != 0:
        raise ArithmeticError(f"pi factors did not cancel for moment {alpha}")
    return value


def sphere_monomial_moment(alpha: Exponent, d: int) -> Fraction:
    """Normalised surface moment (1/sigma) int_S xi^alpha dsigma."""
    alpha = tuple(int(a) for a in alpha)
    if d < 2:
        raise ParameterError(f"sphere moments need d >= 2, got {d}")
    if len(alpha) != d:
        raise ParameterError(f"exponent {alpha} does not have {d} entries")
    return _sphere_moment(alpha, d)


@lru_cache(maxsize=None)
def _ball_moment(alpha: Exponent, mu: Fraction, d: int) -> Fraction:
    sphere = _sphere_moment(alpha, d)
    if sphere == 0:
        return sphere
    # radial Beta quotient B(k + d/2, mu + 1) / B(d/2, mu + 1)
    k = sum(alpha) // 2
    return sphere * pochhammer(Fraction(d, 2), k) / pochhammer(Fraction(d, 2) + mu + 1, k)


def check_mu(mu: RationalLike) -> Fraction:
    value = as_rational(mu)
    if value <= -1:
        raise ParameterError(f"weight parameter mu must exceed -1, got {value}")
    return value


def ball_monomial_moment(alpha: Exponent, mu: RationalLike, d: int) -> Fraction:
    """Normalised moment b_mu int_B x^alpha (1 - |x|^2)^mu dx."""
    alpha = tuple(int(a) for a in alpha)
    if d < 2:
        raise ParameterError(f"ball moments need d >= 2, got {d}")
    if len(alpha) != d:
        raise ParameterError(f"exponent {alpha} does not have {d} entries")
    return _ball_moment(alpha, check_mu(mu), d)


def exact_inner_product(p: ExactPoly, q: ExactPoly, mu: RationalLike) -> Fraction:
    _check_same_dim(p, q)
    mu = check_mu(mu)
    total = Fraction(0)
    for a, ca in p.items():
        for b, cb in q.items():
            total += ca * cb * _ball_moment(tuple(x + y for x, y in zip(a, b)), mu, p.dim)
    return total


def sphere_inner_product(p: ExactPoly, q: ExactPoly) -> Fraction:
    _check_same_dim(p, q)
    total = Fraction(0)
    for a, ca in p.items():
        for b, cb in q.items():
            total += ca * cb * _sphere_moment(tuple(x + y for x, y in zip(a, b)), p.dim)
    return total


def green_residual(p: ExactPoly, q: ExactPoly, mu: RationalLike) -> Fraction:
    """<lap p, q>_mu + <grad p . grad q>_mu - 2(mu + d/2) <q, x.grad p>_{mu-1}.

    Integration by parts against the weight; zero for every mu > 0.
    """
    _check_same_dim(p, q)
    mu = check_mu(mu)
    if mu <= 0:
        raise ParameterError("integration by parts needs mu > 0")
    grad_term = sum(
        (exact_inner_product(dp, dq, mu) for dp, dq in zip(gradient(p), gradient(q))),
        Fraction(0),
    )
    boundary = 2 * (mu + Fraction(p.dim, 2)) * exact_inner_product(q, euler_derivative(p), mu - 1)
    return exact_inner_product(laplacian(p), q, mu) + grad_term - boundary
