from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from ..errors import BallharmError
from ..models import BallBasisIndex
from . import appendix
from .ballbasis import (
    assemble_ball,
    b_ratio,
    ball_basis_raw,
    ball_derivative_expansion,
    ball_indices,
    beltrami_eigen,
    h_ang,
    h_grad,
    h_norm,
    kappa,
    laplacian_image,
    raw_norm,
)
from .expansion import (
    angular_identity_residual,
    beltrami_map_residual,
    commuting_check,
    gradient_identity_residual,
    h_ratio,
    laplacian_map_residual,
)
from .orthopoly1d import (
    gegenbauer_identity_residuals,
    jacobi_contiguous_exact,
    jacobi_ode_residual_exact,
)
from .polyalg import (
    ExactPoly,
    angular_derivative,
    as_rational,
    exact_inner_product,
    green_residual,
    laplace_beltrami,
    laplacian,
    poly_diff,
    sphere_inner_product,
)
from .quadrature import build_ball_rule, certify_rule
from .spherical import (
    assemble,
    derivative_expansion,
    harmonic_basis,
    harmonic_indices,
    project_to_harmonic,
    raise_expansion,
    sphere_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Check:
    label: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerifyOptions:
    d: int = 2
    mu: Fraction = Fraction(0)
    n_max: int = 6
    seed: int = 0
    fixtures: int = 20


Suite = Callable[[VerifyOptions], Iterator[Check]]


def _summary(label: str, failures: list[str], total: int) -> Check:
    if failures:
        shown = "; ".join(failures[:5])
        return Check(label, False, f"{len(failures)}/{total} failed: {shown}")
    return Check(label, True, f"{total} cases")


def random_polynomial(rng: np.random.Generator, d: int, max_degree: int, terms: int = 4) -> ExactPoly:
    """Sparse polynomial with small rational coefficients."""
    acc: dict[tuple[int, ...], Fraction] = {}
    for _ in range(terms):
        degree = int(rng.integers(0, max_degree + 1))
        cuts = np.sort(rng.integers(0, degree + 1, size=d - 1))
        alpha = tuple(int(k) for k in np.diff(np.concatenate([[0], cuts, [degree]])))
        coeff = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))
        acc[alpha] = acc.get(alpha, Fraction(0)) + coeff
    return ExactPoly(d, acc)


def polynomial_fixtures(d: int, count: int, max_degree: int, seed: int) -> list[ExactPoly]:
    rng = np.random.default_rng(seed)
    return [random_polynomial(rng, d, max_degree) for _ in range(count)]


# identities -------------------------------------------------------------


def harmonic_derivative_checks(opts: VerifyOptions) -> Iterator[Check]:
    d = opts.d
    bound = 2 ** max(d - 2, 0)
    diff_fail, raise_fail, sparse_fail, total = [], [], [], 0
    for n in range(opts.n_max + 1):
        for idx in harmonic_indices(d, n):
            y = harmonic_basis(idx)
            for i in range(1, d + 1):
                total += 1
                der = derivative_expansion(idx, i)
                up = raise_expansion(idx, i)
                if assemble(der) != poly_diff(y, i):
                    diff_fail.append(f"d_{i} {idx}")
                if assemble(up) != project_to_harmonic(y * ExactPoly.variable(d, i)):
                    raise_fail.append(f"proj x_{i} {idx}")
                if len(der) > bound or len(up) > bound:
                    sparse_fail.append(f"{idx} axis {i}: {len(der)}/{len(up)} terms")
    yield _summary("harmonic derivative expansion", diff_fail, total)
    yield _summary("harmonic projection of x_i Y", raise_fail, total)
    yield _summary(f"harmonic expansions use at most {bound} terms", sparse_fail, total)


def ball_derivative_checks(opts: VerifyOptions) -> Iterator[Check]:
    d, mu = opts.d, opts.mu
    bound = 2 ** (d - 1)
    exact_fail, shape_fail, total = [], [], 0
    for n in range(1, opts.n_max + 1):
        for idx in ball_indices(n, d, mu):
            p = ball_basis_raw(idx)
            for i in range(1, d + 1):
                total += 1
                terms = ball_derivative_expansion(idx, i)
                if assemble_ball(terms, d) != p.diff(i):
                    exact_fail.append(f"d_{i} {idx}")
                if len(terms) > bound or any(t.index.j not in (idx.j, idx.j - 1) for t in terms):
                    shape_fail.append(f"d_{i} {idx}")
    yield _summary("ball basis derivative expansion", exact_fail, total)
    yield _summary(f"ball derivative uses k in (l, l-1) and at most {bound} terms", shape_fail, total)


def laplacian_action_checks(opts: VerifyOptions) -> Iterator[Check]:
    d, mu = opts.d, opts.mu
    lap_fail, bel_fail, total = [], [], 0
    for n in range(opts.n_max + 1):
        for idx in ball_indices(n, d, mu):
            total += 1
            p = ball_basis_raw(idx)
            image = laplacian_image(idx)
            expected = ExactPoly.zero(d) if image is None else ball_basis_raw(image.index) * image.coeff
            if laplacian(p) != expected:
                lap_fail.append(str(idx))
            if laplace_beltrami(p) != p * beltrami_eigen(idx.n, idx.j, d):
                bel_fail.append(str(idx))
    yield _summary("Laplacian lowers P to kappa P at mu + 2", lap_fail, total)
    yield _summary("Laplace-Beltrami eigenvalue -q(q + d - 2)", bel_fail, total)
    spot = kappa(1, 0, 2)
    yield Check("kappa_1 at d=2, mu=0 equals 8", spot == 8, f"got {spot}")


def univariate_checks(opts: VerifyOptions) -> Iterator[Check]:
    u = ExactPoly.variable(1, 1)
    geg_fail, jac_fail, total = [], [], 0
    for n in range(opts.n_max + 3):
        for lam in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(opts.d, 2)):
            total += 1
            for name, residual in gegenbauer_identity_residuals(n, lam, u).items():
                if not residual.is_zero():
                    geg_fail.append(f"{name} n={n} lam={lam}")
        for a, b in ((opts.mu, Fraction(opts.d - 2, 2)), (Fraction(1, 2), Fraction(3, 2))):
            lhs, rhs = jacobi_contiguous_exact(n, a, b)
            if lhs != rhs or not jacobi_ode_residual_exact(n, a, b).is_zero():
                jac_fail.append(f"n={n} ({a}, {b})")
    yield _summary("Gegenbauer lowering, derivative and raising relations", geg_fail, total)
    yield _summary("Jacobi contiguous relation and differential equation", jac_fail, total)


def green_checks(opts: VerifyOptions) -> Iterator[Check]:
    mu = opts.mu if opts.mu > 0 else Fraction(1, 2)
    polys = polynomial_fixtures(opts.d, opts.fixtures, min(opts.n_max, 4), opts.seed)
    failures = [
        f"fixture {k}" for k, (p, q) in enumerate(zip(polys[::2], polys[1::2])) if green_residual(p, q, mu) != 0
    ]
    yield _summary(f"integration by parts against the weight (mu={mu})", failures, len(polys) // 2)


def coefficient_identity_checks(opts: VerifyOptions) -> Iterator[Check]:
    d, mu = opts.d, opts.mu
    top = min(opts.n_max, 4)
    polys = polynomial_fixtures(d, 3, top, opts.seed + 1)
    grad_fail, ang_fail, total = [], [], 0
    for k, f in enumerate(polys):
        for n in range(top + 1):
            for idx in ball_indices(n, d, mu):
                total += 1
                if gradient_identity_residual(f, idx) != 0:
                    grad_fail.append(f"fixture {k} {idx}")
                if angular_identity_residual(f, idx) != 0:
                    ang_fail.append(f"fixture {k} {idx}")
    yield _summary("gradient form diagonalises the coefficients", grad_fail, total)
    yield _summary("angular form diagonalises the coefficients", ang_fail, total)


def h_ratio_checks(opts: VerifyOptions) -> Iterator[Check]:
    d, mu = opts.d, float(opts.mu)
    spot = h_ratio(0, 1, 2, 4, 2)
    yield Check("h ratio at d=2, mu=0, m=4, j=2, s=1 equals 1/3", spot == Fraction(1, 3), f"got {spot}")
    for s in (1, 2):
        per_m = []
        for m in range(max(4 * s, 8), 201, 8):
            values = [h_ratio(mu, s, j, m, d) for j in range(max(s, -(-m // 4)), m // 2 + 1)]
            per_m.append(max(values))
        spread = max(per_m) / min(per_m)
        yield Check(
            f"h ratio bounded for j in [m/4, m/2], s={s}",
            max(per_m) <= 2 * per_m[-1] and spread < 1e3,
            f"max {max(per_m):.4g}, at m=200 {per_m[-1]:.4g}",
        )


def identities_suite(opts: VerifyOptions) -> Iterator[Check]:
    yield from univariate_checks(opts)
    yield from harmonic_derivative_checks(opts)
    yield from ball_derivative_checks(opts)
    yield from laplacian_action_checks(opts)
    yield from coefficient_identity_checks(opts)
    yield from green_checks(opts)
    yield from h_ratio_checks(opts)


# orthogonality ----------------------------------------------------------


def _gram(indices, form, diagonal) -> list[str]:
    failures = []
    for a, p in enumerate(indices):
        for q in indices[a:]:
            value = form(p, q)
            expected = diagonal(p) if p == q else 0
            if value != expected:
                failures.append(f"<{p}, {q}> = {value}, expected {expected}")
    return failures


def orthogonality_suite(opts: VerifyOptions) -> Iterator[Check]:
    d, mu = opts.d, opts.mu
    top = min(opts.n_max, 4)
    indices = [idx for n in range(top + 1) for idx in ball_indices(n, d, mu)]

    def l2(p: BallBasisIndex, q: BallBasisIndex) -> Fraction:
        return exact_inner_product(ball_basis_raw(p), ball_basis_raw(q), mu)

    def grad(p: BallBasisIndex, q: BallBasisIndex) -> Fraction:
        pp, qq = ball_basis_raw(p), ball_basis_raw(q)
        total = sum((exact_inner_product(pp.diff(i), qq.diff(i), mu + 1) for i in range(1, d + 1)), Fraction(0))
        return b_ratio(mu, d) * total

    def ang(p: BallBasisIndex, q: BallBasisIndex) -> Fraction:
        pp, qq = ball_basis_raw(p), ball_basis_raw(q)
        return sum(
            (
                exact_inner_product(angular_derivative(pp, i, j), angular_derivative(qq, i, j), mu)
                for i in range(1, d + 1)
                for j in range(i + 1, d + 1)
            ),
            Fraction(0),
        )

    yield _summary("ball basis orthogonal with norm h", _gram(indices, l2, raw_norm), len(indices))
    yield _summary(
        "gradient form orthogonal with norm h(grad)",
        _gram(indices, grad, lambda p: h_grad(mu, p.n, p.j, d) * sphere_norm(p.nu)),
        len(indices),
    )
    yield _summary(
        "angular form orthogonal with norm h(D)",
        _gram(indices, ang, lambda p: h_ang(mu, p.n, p.j, d) * sphere_norm(p.nu)),
        len(indices),
    )
    harmonics = [idx for n in range(top + 1) for idx in harmonic_indices(d, n)]
    sphere_fail = []
    for a, y in enumerate(harmonics):
        for z in harmonics[a + 1 :]:
            if sphere_inner_product(harmonic_basis(y), harmonic_basis(z)) != 0:
                sphere_fail.append(f"<{y}, {z}>")
    yield _summary("spherical harmonics orthogonal on the sphere", sphere_fail, len(harmonics))
    yield from quadrature_checks(opts)


def quadrature_checks(opts: VerifyOptions) -> Iterator[Check]:
    for degree in (8, 20):
        try:
            rule = build_ball_rule(opts.d, opts.mu, degree)
            worst = certify_rule(rule, degree)
        except BallharmError as exc:
            yield Check(f"rule of degree {degree} certified", False, str(exc))
            continue
        yield Check(f"rule of degree {degree} certified", True, f"{rule.size} nodes, worst moment error {worst:.2e}")
    h = h_norm(opts.mu, 2, 1, opts.d)
    yield Check("h of the radial degree-2 element is positive", h > 0, f"h = {h}")


# appendix ---------------------------------------------------------------


def appendix_suite(opts: VerifyOptions) -> Iterator[Check]:
    n_max = max(opts.n_max, 10)
    circle = appendix.check_circle(n_max)
    yield _summary(
        "circle derivative table",
        [f"{c.label} n={c.n}" for c in circle if not c.passed],
        len(circle),
    )
    if opts.d < 3:
        return
    sphere = appendix.check_sphere(n_max)
    yield _summary(
        "two-sphere derivative table",
        [f"{c.label} n={c.n} k={c.k}" for c in sphere if not c.passed],
        len(sphere),
    )
    printed = [c for c in sphere if not c.printed_holds]
    yield Check(
        "two-sphere table as printed needs the k=0 upper coefficient doubled",
        all(c.k == 0 and c.axis in (1, 2) and c.corrected_holds for c in printed),
        f"{len(printed)} printed entries differ, all at k=0 on axes 1 and 2",
    )


# commuting --------------------------------------------------------------


def commuting_suite(opts: VerifyOptions) -> Iterator[Check]:
    d, mu = opts.d, opts.mu
    polys = polynomial_fixtures(d, opts.fixtures, min(opts.n_max, 6), opts.seed)
    n = max(min(opts.n_max, 6) // 2, 1)
    grad_fail, ang_fail = [], []
    for k, f in enumerate(polys):
        for i in range(1, d + 1):
            if not commuting_check(f, mu, n, i).is_zero():
                grad_fail.append(f"fixture {k} d_{i}")
        for i in range(1, d + 1):
            for j in range(i + 1, d + 1):
                if not commuting_check(f, mu, n, (i, j)).is_zero():
                    ang_fail.append(f"fixture {k} D_{i},{j}")
    yield _summary(f"d_i S_n^mu = S_(n-1)^(mu+1) d_i (n={n})", grad_fail, len(polys))
    yield _summary(f"D_i,j S_n^mu = S_n^mu D_i,j (n={n})", ang_fail, len(polys))
    lap_fail = [f"fixture {k}" for k, f in enumerate(polys) if laplacian_map_residual(f, mu) != 0]
    bel_fail = [f"fixture {k}" for k, f in enumerate(polys) if beltrami_map_residual(f, mu) != 0]
    yield _summary("Laplacian coefficient map", lap_fail, len(polys))
    yield _summary("Laplace-Beltrami coefficient map", bel_fail, len(polys))


SUITES: dict[str, dict] = {
    "identities": {
        "run": identities_suite,
        "covers": [
            "Gegenbauer lowering, derivative and raising relations",
            "Jacobi contiguous relation and differential equation",
            "d_i Y_n and proj(x_i Y_n) as sparse harmonic expansions",
            "d_i P_(l,nu)^(n,mu) over P_(k,tau)^(n-1,mu+1), k in {l, l-1}",
            "Delta P = kappa_(n-j)^mu P at mu + 2; Delta_0 P = -q(q+d-2) P",
            "gradient and angular forms diagonal in the coefficients",
            "integration by parts against (1-|x|^2)^mu",
            "h_(j,m)^mu / h_(j-s,m-2s)^(mu+2s) bounded for j ~ m",
        ],
    },
    "orthogonality": {
        "run": orthogonality_suite,
        "covers": [
            "<P, Q>_mu = h delta (ball basis norms)",
            "b_mu <grad P, grad Q>_(mu+1) = h(grad) delta",
            "sum_(i<j) <D_ij P, D_ij Q>_mu = h(D) delta",
            "orthogonality of spherical harmonics",
            "quadrature certification against closed-form moments",
        ],
    },
    "appendix": {
        "run": appendix_suite,
        "covers": [
            "circle table d_i Y^(k)_n = +-n Y_(n-1)",
            "two-sphere table for d_1, d_2, d_3 of Y_(k,1) and Y_(k,2)",
        ],
    },
    "commuting": {
        "run": commuting_suite,
        "covers": [
            "d_i S_n^mu f = S_(n-1)^(mu+1) d_i f",
            "D_ij S_n^mu f = S_n^mu D_ij f",
            "Laplacian and Laplace-Beltrami coefficient maps",
        ],
    },
}


def suite_names(name: str) -> list[str]:
    return list(SUITES) if name == "all" else [name]


def run_suite(name: str, opts: VerifyOptions) -> list[Check]:
    """Run one suite, or every suite for ``all``; a crashing check is reported as a failure."""
    checks = []
    for suite in suite_names(name):
        try:
            checks.extend(SUITES[suite]["run"](opts))
        except (BallharmError, ArithmeticError) as exc:
            logger.exception("suite %s aborted", suite)
            checks.append(Check(f"{suite} suite", False, f"aborted: {exc}"))
    return checks


def as_options(d: int, mu, n_max: int, seed: int, fixtures: int = 20) -> VerifyOptions:
    return VerifyOptions(d=d, mu=as_rational(mu), n_max=n_max, seed=seed, fixtures=fixtures)
