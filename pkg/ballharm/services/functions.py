from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from ..errors import ParameterError

logger = logging.getLogger(__name__)

SMOOTHNESS_TAGS = ("entire", "W2", "harmonic", "radial", "spherical")
FD_STEP = 2e-4
FD_TOL = 1e-6


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    smoothness: str
    description: str
    build: Callable[[tuple[sp.Symbol, ...]], sp.Expr]
    max_even_s: int = 2
    max_odd_s: int = 1
    min_d: int = 2
    # f = (1 - |x|^2)^boundary_power * build(x) with build polynomial
    boundary_power: sp.Rational | None = None


def _coords(d: int) -> tuple[sp.Symbol, ...]:
    return sp.symbols(f"x1:{d + 1}", real=True)


def _r2(x) -> sp.Expr:
    return sum(v**2 for v in x)


FINITE_SMOOTH_GAMMA = sp.Rational(5, 2)

FUNCTION_REGISTRY: dict[str, FunctionSpec] = {
    "radial_exp": FunctionSpec(
        name="radial_exp",
        smoothness="radial",
        description="exp(|x|^2), radial and entire",
        build=lambda x: sp.exp(_r2(x)),
    ),
    "harmonic_deg6": FunctionSpec(
        name="harmonic_deg6",
        smoothness="harmonic",
        description="Re (x1 + i x2)^6, a solid harmonic of degree 6",
        build=lambda x: sp.expand(sp.re(sp.expand((x[0] + sp.I * x[1]) ** 6))),
    ),
    "harmonic_exp": FunctionSpec(
        name="harmonic_exp",
        smoothness="harmonic",
        description="exp(x1) cos(x2), harmonic and entire",
        build=lambda x: sp.exp(x[0]) * sp.cos(x[1]),
    ),
    "spherical_h2": FunctionSpec(
        name="spherical_h2",
        smoothness="spherical",
        description="(x1^2 - x2^2)/|x|^2, a degree-two harmonic of x/|x|",
        build=lambda x: (x[0] ** 2 - x[1] ** 2) / _r2(x),
        max_even_s=-1,
        max_odd_s=0,
        min_d=3,
    ),
    "exp_sum": FunctionSpec(
        name="exp_sum",
        smoothness="entire",
        description="exp(x1 + ... + xd)",
        build=lambda x: sp.exp(sum(x)),
    ),
    "finite_smooth": FunctionSpec(
        name="finite_smooth",
        smoothness="W2",
        description="(1 - |x|^2)^(5/2), rate limited by the boundary",
        build=lambda x: sp.Integer(1),
        boundary_power=FINITE_SMOOTH_GAMMA,
    ),
}


def _laplacian(expr: sp.Expr, x) -> sp.Expr:
    return sum(sp.diff(expr, v, 2) for v in x)


def _angular(expr: sp.Expr, x, i: int, j: int) -> sp.Expr:
    xi, xj = x[i - 1], x[j - 1]
    return xi * sp.diff(expr, xj) - xj * sp.diff(expr, xi)


@dataclass(frozen=True)
class BoundaryForm:
    """(1 - |x|^2)^power * factor with a polynomial factor.

    The calculus stays inside this shape:
    d_i (w^a p) = w^(a-1) (-2a x_i p + w d_i p) and D_ij (w^a p) = w^a D_ij p.
    """

    power: sp.Rational
    factor: sp.Expr

    def is_zero(self) -> bool:
        return self.factor == 0

    def expr(self, x) -> sp.Expr:
        if self.is_zero():
            return sp.Integer(0)
        return (1 - _r2(x)) ** self.power * self.factor

    def diff(self, x, i: int) -> "BoundaryForm":
        xi = x[i - 1]
        factor = -2 * self.power * xi * self.factor + (1 - _r2(x)) * sp.diff(self.factor, xi)
        return BoundaryForm(self.power - 1, sp.expand(factor))

    def laplacian(self, x) -> "BoundaryForm":
        factor = sum(self.diff(x, i).diff(x, i).factor for i in range(1, len(x) + 1))
        return BoundaryForm(self.power - 2, sp.expand(factor))

    def angular(self, x, i: int, j: int) -> "BoundaryForm":
        return BoundaryForm(self.power, sp.expand(_angular(self.factor, x, i, j)))


def _tidy(expr: sp.Expr) -> sp.Expr:
    if expr.is_polynomial():
        return sp.expand(expr)
    if sp.count_ops(expr) < 400:
        return sp.simplify(expr)
    return expr


def _lambdify(expr: sp.Expr, x) -> Callable[[np.ndarray], np.ndarray]:
    compiled = sp.lambdify(x, expr, modules="numpy")

    def evaluate(points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.asarray(compiled(*pts.T), dtype=float)
        return np.broadcast_to(values, (len(pts),)).copy()

    return evaluate


class TestFunction:
    """A registered f on B^d with its differential images built symbolically.

    Functions with a boundary power keep every image as (1 - |x|^2)^a p(x);
    ``boundary_form`` hands that shape back so expansions can fold the power
    into the weight.
    """

    __test__ = False

    def __init__(self, spec: FunctionSpec, d: int):
        if d < spec.min_d:
            raise ParameterError(f"{spec.name} needs d >= {spec.min_d}, got {d}")
        self.spec = spec
        self.d = d
        self.symbols = _coords(d)
        self._forms: dict[sp.Expr, BoundaryForm] = {}
        if spec.boundary_power is None:
            self._base = None
            self.expr = spec.build(self.symbols)
        else:
            self._base = BoundaryForm(sp.Rational(spec.boundary_power), sp.expand(spec.build(self.symbols)))
            self.expr = self._register(self._base)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def smoothness(self) -> str:
        return self.spec.smoothness

    def __repr__(self) -> str:
        return f"TestFunction({self.name!r}, d={self.d})"

    def __call__(self, points) -> np.ndarray:
        return self.evaluator(self.expr)(points)

    def evaluator(self, expr: sp.Expr):
        return _cached_evaluator(expr, self.symbols)

    def boundary_form(self, expr: sp.Expr) -> BoundaryForm | None:
        """The (power, factor) split of an image, or None for functions without a boundary power."""
        return self._forms.get(expr)

    def _register(self, form: BoundaryForm) -> sp.Expr:
        expr = form.expr(self.symbols)
        if not form.is_zero():
            self._forms[expr] = form
        return expr

    @lru_cache(maxsize=None)
    def _laplacian_form(self, s: int) -> BoundaryForm:
        if s == 0:
            return self._base
        return self._laplacian_form(s - 1).laplacian(self.symbols)

    @lru_cache(maxsize=None)
    def _beltrami_form(self, s: int) -> BoundaryForm:
        if s == 0:
            return self._base
        below = self._beltrami_form(s - 1)
        forms = [below.angular(self.symbols, i, j).angular(self.symbols, i, j) for i, j in self.pairs()]
        return BoundaryForm(below.power, sp.expand(sum(f.factor for f in forms)))

    @lru_cache(maxsize=None)
    def laplacian_power(self, s: int) -> sp.Expr:
        if s < 0:
            raise ParameterError(f"power s must be >= 0, got {s}")
        if s == 0:
            return self.expr
        if self._base is not None:
            return self._register(self._laplacian_form(s))
        return _tidy(_laplacian(self.laplacian_power(s - 1), self.symbols))

    @lru_cache(maxsize=None)
    def beltrami_power(self, s: int) -> sp.Expr:
        if s < 0:
            raise ParameterError(f"power s must be >= 0, got {s}")
        if s == 0:
            return self.expr
        if self._base is not None:
            return self._register(self._beltrami_form(s))
        below = self.beltrami_power(s - 1)
        pairs = self.pairs()
        return _tidy(sum(_angular(_angular(below, self.symbols, i, j), self.symbols, i, j) for i, j in pairs))

    @lru_cache(maxsize=None)
    def partial_image(self, i: int, s: int) -> sp.Expr:
        """d_i Delta^s f."""
        self._check_axis(i)
        if self._base is not None:
            self.laplacian_power(s)
            return self._register(self._laplacian_form(s).diff(self.symbols, i))
        return _tidy(sp.diff(self.laplacian_power(s), self.symbols[i - 1]))

    @lru_cache(maxsize=None)
    def angular_image(self, i: int, j: int, s: int) -> sp.Expr:
        """D_{i,j} Delta_0^s f."""
        self._check_axis(i)
        self._check_axis(j)
        if i == j:
            raise ParameterError("angular derivatives need two distinct axes")
        if self._base is not None:
            self.beltrami_power(s)
            return self._register(self._beltrami_form(s).angular(self.symbols, i, j))
        return _tidy(_angular(self.beltrami_power(s), self.symbols, i, j))

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.d + 1) for j in range(i + 1, self.d + 1)]

    def _check_axis(self, i: int) -> None:
        if not 1 <= i <= self.d:
            raise ParameterError(f"axis {i} out of range 1..{self.d}")

    def check_order(self, mode: str, s: int) -> None:
        if mode not in ("even", "odd"):
            raise ParameterError(f"mode must be 'even' or 'odd', got {mode!r}")
        top = self.spec.max_even_s if mode == "even" else self.spec.max_odd_s
        if top < 0:
            raise ParameterError(f"{self.name} has no {mode} images")
        if not 0 <= s <= top:
            raise ParameterError(f"{self.name} provides {mode} images for 0 <= s <= {top}, got s={s}")


@lru_cache(maxsize=256)
def _cached_evaluator(expr: sp.Expr, symbols: tuple[sp.Symbol, ...]):
    return _lambdify(expr, symbols)


def is_zero(expr: sp.Expr) -> bool:
    return expr == 0


def get_function(name: str, d: int) -> TestFunction:
    try:
        spec = FUNCTION_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(FUNCTION_REGISTRY))
        raise ParameterError(f"unknown function {name!r}; choose one of {known}") from None
    return _build(spec, d)


@lru_cache(maxsize=None)
def _build(spec: FunctionSpec, d: int) -> TestFunction:
    return TestFunction(spec, d)


def interior_points(d: int, count: int = 20, seed: int = 0, r_min: float = 0.3, r_max: float = 0.8) -> np.ndarray:
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((count, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * rng.uniform(r_min, r_max, size=(count, 1))


def _fd_partial(g, points: np.ndarray, axis: int, h: float) -> np.ndarray:
    step = np.zeros(points.shape[1])
    step[axis - 1] = h
    return (g(points + step) - g(points - step)) / (2 * h)


def _fd_laplacian(g, points: np.ndarray, h: float) -> np.ndarray:
    centre = g(points)
    total = np.zeros(len(points))
    for axis in range(points.shape[1]):
        step = np.zeros(points.shape[1])
        step[axis] = h
        total += (g(points + step) - 2 * centre + g(points - step)) / h**2
    return total


def _fd_angular(g, points: np.ndarray, i: int, j: int, h: float) -> np.ndarray:
    return points[:, i - 1] * _fd_partial(g, points, j, h) - points[:, j - 1] * _fd_partial(g, points, i, h)


@dataclass(frozen=True)
class FDResult:
    label: str
    worst: float

    @property
    def passed(self) -> bool:
        return self.worst <= FD_TOL


def fd_check(func: TestFunction, mode: str, s: int, points: np.ndarray | None = None, h: float = FD_STEP) -> list[FDResult]:
    """Compare each analytic image with a central difference of the image one step below it."""
    func.check_order(mode, s)
    pts = interior_points(func.d) if points is None else points
    results = []

    def compare(label: str, analytic: sp.Expr, approx: np.ndarray) -> None:
        exact = func.evaluator(analytic)(pts)
        worst = float(np.max(np.abs(exact - approx) / (1 + np.abs(exact))))
        results.append(FDResult(label, worst))

    if mode == "even":
        for k in range(1, s + 1):
            below = func.evaluator(func.laplacian_power(k - 1))
            compare(f"Delta^{k}", func.laplacian_power(k), _fd_laplacian(below, pts, h))
            total = np.zeros(len(pts))
            for i, j in func.pairs():
                total += _fd_angular(func.evaluator(func.angular_image(i, j, k - 1)), pts, i, j, h)
            compare(f"Delta_0^{k}", func.beltrami_power(k), total)
    else:
        for i in range(1, func.d + 1):
            compare(f"d_{i} Delta^{s}", func.partial_image(i, s), _fd_partial(func.evaluator(func.laplacian_power(s)), pts, i, h))
        for i, j in func.pairs():
            below = func.evaluator(func.beltrami_power(s))
            compare(f"D_{i},{j} Delta_0^{s}", func.angular_image(i, j, s), _fd_angular(below, pts, i, j, h))
    for result in results:
        if not result.passed:
            logger.warning("%s: %s disagrees with finite differences by %.2e", func.name, result.label, result.worst)
    return results
