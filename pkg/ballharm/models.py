from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .errors import ParameterError


@dataclass(frozen=True, order=True)
class HarmonicIndex:
    """Multi-index (n_1, ..., n_d) with n_1 in {0, 1} labelling Y_n on S^{d-1}."""

    d: int
    n: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(k) for k in self.n))
        if self.d < 2:
            raise ParameterError(f"spherical harmonics need d >= 2, got {self.d}")
        if len(self.n) != self.d:
            raise ParameterError(f"index {self.n} does not have {self.d} entries")
        if any(k < 0 for k in self.n) or self.n[0] not in (0, 1):
            raise ParameterError(f"invalid harmonic index {self.n}")

    @classmethod
    def of(cls, *n: int) -> "HarmonicIndex":
        return cls(len(n), tuple(n))

    @classmethod
    def decode(cls, text: str) -> "HarmonicIndex":
        parts = tuple(int(p) for p in text.split("-"))
        return cls(len(parts), parts)

    @property
    def degree(self) -> int:
        return sum(self.n)

    @property
    def last(self) -> int:
        return self.n[-1]

    @property
    def head(self) -> "HarmonicIndex":
        """The index n' = (n_1, ..., n_{d-1}) one dimension down."""
        if self.d == 2:
            raise ParameterError("the circle basis has no lower-dimensional head")
        return HarmonicIndex(self.d - 1, self.n[:-1])

    def extend(self, last: int) -> "HarmonicIndex":
        return HarmonicIndex(self.d + 1, self.n + (last,))

    def lam(self, j: int | None = None) -> Fraction:
        """lambda_j = n_1 + ... + n_{j-1} + (j - 2)/2; defaults to j = d."""
        j = self.d if j is None else j
        if not 2 <= j <= self.d:
            raise ParameterError(f"lambda_j is defined for 2 <= j <= {self.d}, got {j}")
        return Fraction(sum(self.n[: j - 1])) + Fraction(j - 2, 2)

    def encode(self) -> str:
        return "-".join(str(k) for k in self.n)

    def __str__(self) -> str:
        return f"Y[{self.encode()}]"


@dataclass(frozen=True)
class HarmonicExpansion:
    """Linear combination of basis harmonics sharing one degree."""

    d: int
    degree: int
    terms: tuple[tuple[HarmonicIndex, Fraction], ...] = ()

    @classmethod
    def from_mapping(cls, d: int, degree: int, coeffs: Mapping[HarmonicIndex, Fraction]) -> "HarmonicExpansion":
        terms = []
        for idx in sorted(coeffs):
            coeff = Fraction(coeffs[idx])
            if coeff == 0:
                continue
            if idx.d != d or idx.degree != degree:
                raise ParameterError(f"{idx} does not belong to degree {degree} in dimension {d}")
            terms.append((idx, coeff))
        return cls(d, degree, tuple(terms))

    def as_dict(self) -> dict[HarmonicIndex, Fraction]:
        return dict(self.terms)

    def __iter__(self) -> Iterator[tuple[HarmonicIndex, Fraction]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True, order=True)
class BallBasisIndex:
    """(n, j, nu) of P_{j,nu}^{n,mu} together with the weight parameter mu."""

    n: int
    j: int
    nu: HarmonicIndex
    mu: Fraction = field(default=Fraction(0), compare=True)

    def __post_init__(self):
        object.__setattr__(self, "mu", Fraction(self.mu))
        if self.mu <= -1:
            raise ParameterError(f"weight parameter mu must exceed -1, got {self.mu}")
        if self.j < 0 or 2 * self.j > self.n:
            raise ParameterError(f"radial index j={self.j} invalid for degree {self.n}")
        if self.nu.degree != self.n - 2 * self.j:
            raise ParameterError(f"{self.nu} has degree {self.nu.degree}, expected {self.n - 2 * self.j}")

    @property
    def d(self) -> int:
        return self.nu.d

    @property
    def beta(self) -> Fraction:
        """beta_j = n - 2j + (d - 2)/2, the second Jacobi parameter."""
        return Fraction(self.n - 2 * self.j) + Fraction(self.d - 2, 2)

    @property
    def key(self) -> tuple[int, int, HarmonicIndex]:
        return self.n, self.j, self.nu

    def __str__(self) -> str:
        return f"P[n={self.n}, j={self.j}, nu={self.nu.encode()}, mu={self.mu}]"


@dataclass(frozen=True)
class NormTriple:
    h: Fraction | float
    h_grad: Fraction | float
    h_ang: Fraction | float

    def __post_init__(self):
        if self.h <= 0 or self.h_grad < 0 or self.h_ang < 0:
            raise ParameterError(f"invalid norm triple {self}")


@dataclass(frozen=True)
class BallTerm:
    coeff: Fraction | float
    index: BallBasisIndex
