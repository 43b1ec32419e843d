"""Closed-form derivative tables for the circle and the two-sphere.

The circle table uses its own angular convention, Y1_n = r^n cos(n theta) and
Y2_n = r^n sin(n theta) with x_1 = r cos(theta), i.e. the canonical circle basis
with x_1 and x_2 swapped.  The two-sphere table labels Y_{k,1}^n and Y_{k,2}^n,
which coincide with the canonical indices (0, k, n-k) and (1, k-1, n-k).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ParameterError
from ..models import HarmonicIndex
from .polyalg import ExactPoly, poly_diff
from .spherical import harmonic_basis

CIRCLE_SWAP = (2, 1)


def circle_harmonic(kind: int, n: int) -> ExactPoly:
    """Y^{(kind)}_n in the cos/sin convention; zero for n < 0 or (kind 2, n = 0)."""
    if kind not in (1, 2):
        raise ParameterError(f"circle harmonic kind must be 1 or 2, got {kind}")
    if n < 0 or (kind == 2 and n == 0):
        return ExactPoly.zero(2)
    idx = HarmonicIndex(2, (0, n) if kind == 1 else (1, n - 1))
    return harmonic_basis(idx).permute_axes(CIRCLE_SWAP)


# (kind, axis) -> (sign, target kind) for d_axis Y^{(kind)}_n = sign * n * Y^{(target)}_{n-1}
CIRCLE_TABLE: dict[tuple[int, int], tuple[int, int]] = {
    (1, 1): (1, 1),
    (2, 1): (1, 2),
    (1, 2): (-1, 2),
    (2, 2): (1, 1),
}


def circle_rhs(kind: int, n: int, axis: int) -> ExactPoly:
    sign, target = CIRCLE_TABLE[(kind, axis)]
    return circle_harmonic(target, n - 1) * (sign * n)


def sphere_index(k: int, kind: int, n: int) -> HarmonicIndex | None:
    """Canonical index of Y_{k,kind}^n, or None where the table defines it as zero."""
    if kind not in (1, 2):
        raise ParameterError(f"two-sphere harmonic kind must be 1 or 2, got {kind}")
    if n < 0 or k < 0 or k > n or (kind == 2 and k < 1):
        return None
    if kind == 1:
        return HarmonicIndex(3, (0, k, n - k))
    return HarmonicIndex(3, (1, k - 1, n - k))


def sphere_harmonic(k: int, kind: int, n: int) -> ExactPoly:
    idx = sphere_index(k, kind, n)
    return ExactPoly.zero(3) if idx is None else harmonic_basis(idx)


def _lower_coeff(n: int, k: int) -> Fraction:
    return Fraction((n + k) * (n + k - 1), 2 * (2 * k - 1))


def upper_coeff(k: int, kind: int, axis: int, corrected: bool = True) -> Fraction:
    """Coefficient of the k+1 neighbour.

    The printed table gives k + 1/2 throughout; for Y_{0,1} and axes 1, 2 the
    true value is twice that, since the order-zero circle harmonic carries no
    factor 1/2.
    """
    value = Fraction(2 * k + 1, 2)
    if corrected and k == 0 and kind == 1 and axis in (1, 2):
        value *= 2
    return value


# (kind, axis) -> (sign of lower term, lower kind, sign of upper term, upper kind)
SPHERE_TABLE: dict[tuple[int, int], tuple[int, int, int, int]] = {
    (1, 1): (-1, 2, -1, 2),
    (1, 2): (1, 1, -1, 1),
    (2, 1): (1, 1, 1, 1),
    (2, 2): (1, 2, -1, 2),
}


def sphere_rhs(k: int, kind: int, n: int, axis: int, corrected: bool = True) -> ExactPoly:
    if axis == 3:
        return sphere_harmonic(k, kind, n - 1) * (n + k)
    lower_sign, lower_kind, upper_sign, upper_kind = SPHERE_TABLE[(kind, axis)]
    lower = ExactPoly.zero(3)
    if k >= 1 and sphere_index(k - 1, lower_kind, n - 1) is not None:
        lower = sphere_harmonic(k - 1, lower_kind, n - 1) * (lower_sign * _lower_coeff(n, k))
    upper = sphere_harmonic(k + 1, upper_kind, n - 1) * (upper_sign * upper_coeff(k, kind, axis, corrected))
    return lower + upper


@dataclass(frozen=True)
class AppendixCheck:
    label: str
    n: int
    k: int | None
    axis: int
    printed_holds: bool
    corrected_holds: bool

    @property
    def passed(self) -> bool:
        return self.corrected_holds


def check_circle(n_max: int = 10) -> list[AppendixCheck]:
    checks = []
    for n in range(1, n_max + 1):
        for kind in (1, 2):
            for axis in (1, 2):
                ok = poly_diff(circle_harmonic(kind, n), axis) == circle_rhs(kind, n, axis)
                checks.append(AppendixCheck(f"d_{axis} Y{kind}_n", n, None, axis, ok, ok))
    return checks


def check_sphere(n_max: int = 10) -> list[AppendixCheck]:
    checks = []
    for n in range(1, n_max + 1):
        for kind in (1, 2):
            for k in range(0 if kind == 1 else 1, n + 1):
                y = sphere_harmonic(k, kind, n)
                for axis in (1, 2, 3):
                    lhs = poly_diff(y, axis)
                    checks.append(
                        AppendixCheck(
                            f"d_{axis} Y_(k,{kind})^n",
                            n,
                            k,
                            axis,
                            printed_holds=lhs == sphere_rhs(k, kind, n, axis, corrected=False),
                            corrected_holds=lhs == sphere_rhs(k, kind, n, axis, corrected=True),
                        )
                    )
    return checks
