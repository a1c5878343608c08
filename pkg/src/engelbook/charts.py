"""Charts, scalar fields, vector fields, differential forms, and sampling.

Scalar components are either exact trigonometric polynomials (``Expr``) or
numeric closures (``NumericScalar``).  All calculus in this module dispatches
on that duck-typed pair and stays exact whenever every operand is exact; a
numeric operand makes the result numeric, with derivative closures chained
through sum and product rules so analytic gradients survive arithmetic.
Central differences (step 1e-6) are the fallback of last resort.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .trigpoly import (
    KIND_ANGULAR,
    Coordinate,
    Expr,
    parse_expression,
)

__all__ = [
    "Chart",
    "Interval",
    "IntegerAffineMap",
    "NumericScalar",
    "OneForm",
    "ScalarLike",
    "TwoForm",
    "VectorField",
    "batch_eval_scalars",
    "differential",
    "exterior_derivative",
    "interior_product",
    "lie_bracket",
    "lie_derivative_oneform",
    "pointwise_rank",
    "wedge_top",
]

FD_STEP = 1e-6
RANK_TOL = 1e-9


@dataclass(frozen=True)
class Interval:
    """A coordinate range; open endpoints are avoided when sampling."""

    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def sample_range(self, margin: float) -> tuple[float, float]:
        span = self.hi - self.lo
        lo = self.lo + margin * span if self.lo_open else self.lo
        hi = self.hi - margin * span if self.hi_open else self.hi
        return lo, hi


_ANGULAR_INTERVAL = Interval(0.0, math.tau, lo_open=False, hi_open=True)


# -- numeric scalars ---------------------------------------------------------


@dataclass(frozen=True)
class NumericScalar:
    """A scalar given by a closure over stacked points, with optional
    analytic partial closures per coordinate.

    ``fn`` maps an array of shape (..., dim) to an array of shape (...).
    Missing partials fall back to central differences.
    """

    coords: tuple[Coordinate, ...]
    fn: Callable[[np.ndarray], np.ndarray]
    partials: tuple[Callable[[np.ndarray], np.ndarray] | None, ...] | None = None

    def partial_fn(self, i: int) -> Callable[[np.ndarray], np.ndarray]:
        if self.partials is not None and self.partials[i] is not None:
            return self.partials[i]
        fn = self.fn
        dim = len(self.coords)

        def fd(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, float)
            shift = np.zeros(dim)
            shift[i] = FD_STEP
            return (fn(pts + shift) - fn(pts - shift)) / (2.0 * FD_STEP)

        return fd

    def partial(self, name: str) -> "NumericScalar":
        i = _index_of(self.coords, name)
        return NumericScalar(self.coords, self.partial_fn(i))

    def compile(self) -> Callable[[np.ndarray], np.ndarray]:
        fn = self.fn

        def wrapped(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, float)
            return np.broadcast_to(np.asarray(fn(pts), float), pts.shape[:-1]).copy()

        return wrapped

    def evaluate(self, values: Mapping[str, float | np.ndarray]) -> float | np.ndarray:
        arrays = [np.asarray(values[c.name], float) for c in self.coords]
        shape = np.broadcast_shapes(*(a.shape for a in arrays))
        pts = np.stack([np.broadcast_to(a, shape) for a in arrays], axis=-1)
        out = np.asarray(self.fn(pts), float)
        return float(out) if out.ndim == 0 else out

    # arithmetic chains value and derivative closures together

    def __add__(self, other):
        return _num_add(self, _lift(other, self.coords))

    __radd__ = __add__

    def __neg__(self):
        return _num_scale(self, -1.0)

    def __sub__(self, other):
        return _num_add(self, _num_scale(_lift(other, self.coords), -1.0))

    def __rsub__(self, other):
        return _num_add(_lift(other, self.coords), _num_scale(self, -1.0))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return _num_scale(self, float(other))
        return _num_mul(self, _lift(other, self.coords))

    __rmul__ = __mul__


ScalarLike = Union[Expr, NumericScalar]


def _index_of(coords: tuple[Coordinate, ...], name: str) -> int:
    for i, c in enumerate(coords):
        if c.name == name:
            return i
    raise KeyError(f"no coordinate named {name!r}")


def _lift(x: "ScalarLike | float | int", coords: tuple[Coordinate, ...]) -> NumericScalar:
    if isinstance(x, NumericScalar):
        return x
    if isinstance(x, Expr):
        partials = tuple(x.partial(c.name).compile() for c in x.coords)
        return NumericScalar(x.coords, x.compile(), partials)
    value = float(x)

    def const(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        return np.full(pts.shape[:-1], value)

    def zero(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        return np.zeros(pts.shape[:-1])

    return NumericScalar(coords, const, tuple(zero for _ in coords))


def _num_add(a: NumericScalar, b: NumericScalar) -> NumericScalar:
    fa, fb = a.fn, b.fn
    n = len(a.coords)

    def fn(pts: np.ndarray) -> np.ndarray:
        return fa(pts) + fb(pts)

    def make_partial(i: int):
        pa, pb = a.partial_fn(i), b.partial_fn(i)
        return lambda pts: pa(pts) + pb(pts)

    return NumericScalar(a.coords, fn, tuple(make_partial(i) for i in range(n)))


def _num_scale(a: NumericScalar, c: float) -> NumericScalar:
    fa = a.fn
    n = len(a.coords)

    def fn(pts: np.ndarray) -> np.ndarray:
        return c * fa(pts)

    def make_partial(i: int):
        pa = a.partial_fn(i)
        return lambda pts: c * pa(pts)

    return NumericScalar(a.coords, fn, tuple(make_partial(i) for i in range(n)))


def _num_mul(a: NumericScalar, b: NumericScalar) -> NumericScalar:
    fa, fb = a.fn, b.fn
    n = len(a.coords)

    def fn(pts: np.ndarray) -> np.ndarray:
        return fa(pts) * fb(pts)

    def make_partial(i: int):
        pa, pb = a.partial_fn(i), b.partial_fn(i)
        return lambda pts: pa(pts) * fb(pts) + fa(pts) * pb(pts)

    return NumericScalar(a.coords, fn, tuple(make_partial(i) for i in range(n)))


def scalar_add(a: ScalarLike, b: ScalarLike) -> ScalarLike:
    if isinstance(a, Expr) and isinstance(b, Expr):
        return a + b
    coords = a.coords if isinstance(a, (Expr, NumericScalar)) else b.coords
    return _num_add(_lift(a, coords), _lift(b, coords))


def scalar_mul(a: ScalarLike, b: ScalarLike) -> ScalarLike:
    if isinstance(a, Expr) and isinstance(b, Expr):
        return a * b
    coords = a.coords if isinstance(a, (Expr, NumericScalar)) else b.coords
    return _num_mul(_lift(a, coords), _lift(b, coords))


def scalar_neg(a: ScalarLike) -> ScalarLike:
    return -a if isinstance(a, Expr) else _num_scale(a, -1.0)


def scalar_sub(a: ScalarLike, b: ScalarLike) -> ScalarLike:
    return scalar_add(a, scalar_neg(b))


def is_exact(x: ScalarLike) -> bool:
    return isinstance(x, Expr)


# -- charts -------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """A named coordinate chart with sampling bounds per coordinate."""

    name: str
    coords: tuple[Coordinate, ...]
    bounds: tuple[Interval, ...]

    @classmethod
    def make(
        cls,
        name: str,
        spec: Sequence[tuple],
    ) -> "Chart":
        """Build from (coord_name, kind) or (coord_name, kind, Interval) rows.

        Angular coordinates default to [0, 2*pi)."""
        coords: list[Coordinate] = []
        bounds: list[Interval] = []
        for row in spec:
            if len(row) == 2:
                cname, kind = row
                interval = None
            else:
                cname, kind, interval = row
            c = Coordinate(cname, kind)
            if interval is None:
                if kind != KIND_ANGULAR:
                    raise ValueError(f"coordinate {cname!r} needs an explicit interval")
                interval = _ANGULAR_INTERVAL
            coords.append(c)
            bounds.append(interval)
        return cls(name, tuple(coords), tuple(bounds))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        return _index_of(self.coords, name)

    def coord_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.coords)

    # scalar builders

    def parse(self, text: str) -> Expr:
        return parse_expression(text, self.coords)

    def zero(self) -> Expr:
        return Expr.zero(self.coords)

    def const(self, value: float) -> Expr:
        return Expr.const(self.coords, value)

    def coordinate_expr(self, name: str) -> Expr:
        return Expr.coordinate(self.coords, name)

    # field and form builders

    def vector_field(self, components: Mapping[str, ScalarLike | str | float], label: str = "") -> "VectorField":
        comps = [self.zero()] * self.dim
        for cname, value in components.items():
            comps[self.index(cname)] = self._as_scalar(value)
        return VectorField(self, tuple(comps), label)

    def one_form(self, components: Mapping[str, ScalarLike | str | float], label: str = "") -> "OneForm":
        comps = [self.zero()] * self.dim
        for cname, value in components.items():
            comps[self.index(cname)] = self._as_scalar(value)
        return OneForm(self, tuple(comps), label)

    def basis_vector(self, name: str, label: str = "") -> "VectorField":
        return self.vector_field({name: 1.0}, label or f"d/d{name}")

    def _as_scalar(self, value) -> ScalarLike:
        if isinstance(value, (Expr, NumericScalar)):
            return value
        if isinstance(value, str):
            return self.parse(value)
        return self.const(float(value))

    # sampling

    def sample_axes(self, n_per_axis: int, margin: float = 1e-3) -> list[np.ndarray]:
        axes = []
        for c, b in zip(self.coords, self.bounds):
            if c.is_angular:
                axes.append(np.linspace(b.lo, b.hi, n_per_axis, endpoint=False))
            else:
                lo, hi = b.sample_range(margin)
                axes.append(np.linspace(lo, hi, n_per_axis))
        return axes

    def sample_grid(self, n_per_axis: int, margin: float = 1e-3) -> np.ndarray:
        axes = self.sample_axes(n_per_axis, margin)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def grid_for_min_points(self, min_points: int, margin: float = 1e-3) -> np.ndarray:
        n = max(2, math.ceil(min_points ** (1.0 / self.dim)))
        return self.sample_grid(n, margin)

    def sample_random(self, n: int, rng: np.random.Generator, margin: float = 1e-3) -> np.ndarray:
        cols = []
        for c, b in zip(self.coords, self.bounds):
            lo, hi = (b.lo, b.hi) if c.is_angular else b.sample_range(margin)
            cols.append(rng.uniform(lo, hi, size=n))
        return np.stack(cols, axis=-1)

    def values_at(self, pts: np.ndarray) -> dict[str, np.ndarray]:
        pts = np.asarray(pts, float)
        return {c.name: pts[..., i] for i, c in enumerate(self.coords)}


# -- fields and forms ---------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """Coordinate components of a vector field on one chart."""

    chart: Chart
    components: tuple[ScalarLike, ...]
    label: str = ""

    def apply(self, f: ScalarLike) -> ScalarLike:
        """Directional derivative X(f)."""
        out: ScalarLike = self.chart.zero()
        for c, comp in zip(self.chart.coords, self.components):
            out = scalar_add(out, scalar_mul(comp, f.partial(c.name)))
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(
            self.chart,
            tuple(scalar_add(a, b) for a, b in zip(self.components, other.components)),
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scaled(-1.0)

    def scaled(self, s: "ScalarLike | float") -> "VectorField":
        if isinstance(s, (int, float)):
            s = self.chart.const(float(s))
        return VectorField(self.chart, tuple(scalar_mul(s, c) for c in self.components))

    def compile(self) -> Callable[[np.ndarray], np.ndarray]:
        fns = [c.compile() for c in self.components]

        def fn(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, float)
            return np.stack([f(pts) for f in fns], axis=-1)

        return fn

    def evaluate(self, values: Mapping[str, float]) -> np.ndarray:
        return np.array([float(c.evaluate(values)) for c in self.components])


@dataclass(frozen=True)
class OneForm:
    """Coordinate components of a one-form on one chart."""

    chart: Chart
    components: tuple[ScalarLike, ...]
    label: str = ""

    def apply(self, X: VectorField) -> ScalarLike:
        out: ScalarLike = self.chart.zero()
        for a, x in zip(self.components, X.components):
            out = scalar_add(out, scalar_mul(a, x))
        return out

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(
            self.chart,
            tuple(scalar_add(a, b) for a, b in zip(self.components, other.components)),
        )

    def __sub__(self, other: "OneForm") -> "OneForm":
        return self + other.scaled(-1.0)

    def scaled(self, s: "ScalarLike | float") -> "OneForm":
        if isinstance(s, (int, float)):
            s = self.chart.const(float(s))
        return OneForm(self.chart, tuple(scalar_mul(s, c) for c in self.components))

    def compile(self) -> Callable[[np.ndarray], np.ndarray]:
        fns = [c.compile() for c in self.components]

        def fn(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, float)
            return np.stack([f(pts) for f in fns], axis=-1)

        return fn


@dataclass(frozen=True)
class TwoForm:
    """A two-form stored by its strictly upper-triangular components.

    ``pairs[m] = (i, j)`` with i < j and ``components[m]`` the coefficient of
    dx_i wedge dx_j.
    """

    chart: Chart
    pairs: tuple[tuple[int, int], ...]
    components: tuple[ScalarLike, ...]

    @classmethod
    def zero(cls, chart: Chart) -> "TwoForm":
        pairs = tuple(itertools.combinations(range(chart.dim), 2))
        return cls(chart, pairs, tuple(chart.zero() for _ in pairs))

    def component(self, i: int, j: int) -> ScalarLike:
        if i == j:
            return self.chart.zero()
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -1.0
        m = self.pairs.index((i, j))
        comp = self.components[m]
        return comp if sign > 0 else scalar_neg(comp)

    def apply(self, X: VectorField, Y: VectorField) -> ScalarLike:
        out: ScalarLike = self.chart.zero()
        for (i, j), w in zip(self.pairs, self.components):
            cross = scalar_sub(
                scalar_mul(X.components[i], Y.components[j]),
                scalar_mul(X.components[j], Y.components[i]),
            )
            out = scalar_add(out, scalar_mul(w, cross))
        return out


def differential(f: ScalarLike, chart: Chart) -> OneForm:
    return OneForm(chart, tuple(f.partial(c.name) for c in chart.coords))


def exterior_derivative(alpha: OneForm) -> TwoForm:
    chart = alpha.chart
    pairs = tuple(itertools.combinations(range(chart.dim), 2))
    comps = []
    for i, j in pairs:
        comps.append(
            scalar_sub(
                alpha.components[j].partial(chart.coords[i].name),
                alpha.components[i].partial(chart.coords[j].name),
            )
        )
    return TwoForm(chart, pairs, tuple(comps))


def interior_product(omega: TwoForm, X: VectorField) -> OneForm:
    """The one-form iota_X omega."""
    chart = omega.chart
    comps = []
    for j in range(chart.dim):
        acc: ScalarLike = chart.zero()
        for i in range(chart.dim):
            if i == j:
                continue
            acc = scalar_add(acc, scalar_mul(X.components[i], omega.component(i, j)))
        comps.append(acc)
    return OneForm(chart, tuple(comps))


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    comps = []
    for j in range(X.chart.dim):
        comps.append(scalar_sub(X.apply(Y.components[j]), Y.apply(X.components[j])))
    return VectorField(X.chart, tuple(comps), f"[{X.label},{Y.label}]" if X.label or Y.label else "")


def lie_derivative_oneform(X: VectorField, alpha: OneForm) -> OneForm:
    """Cartan formula: L_X alpha = d(iota_X alpha) + iota_X(d alpha)."""
    chart = alpha.chart
    return differential(alpha.apply(X), chart) + interior_product(exterior_derivative(alpha), X)


def wedge_top(alpha: OneForm, omega: TwoForm) -> tuple[tuple[tuple[int, int, int], ScalarLike], ...]:
    """Components of the three-form alpha wedge omega.

    Returns one (triple, coefficient) entry per strictly increasing index
    triple: a single entry on a 3-chart, four entries on a 4-chart.
    """
    chart = alpha.chart
    out = []
    for i, j, k in itertools.combinations(range(chart.dim), 3):
        coeff = scalar_add(
            scalar_sub(
                scalar_mul(alpha.components[i], omega.component(j, k)),
                scalar_mul(alpha.components[j], omega.component(i, k)),
            ),
            scalar_mul(alpha.components[k], omega.component(i, j)),
        )
        out.append(((i, j, k), coeff))
    return tuple(out)


# -- integer-affine chart maps ------------------------------------------------


@dataclass(frozen=True)
class IntegerAffineMap:
    """A unimodular integer-affine self-map of a chart: x -> A x + b.

    Pushforward and pullback stay inside the exact expression class because
    the inverse is again integer-affine.
    """

    chart: Chart
    matrix: tuple[tuple[int, ...], ...]
    offset: tuple[float, ...]

    def __post_init__(self) -> None:
        n = self.chart.dim
        a = np.array(self.matrix, dtype=float)
        if a.shape != (n, n):
            raise ValueError("matrix shape must match the chart dimension")
        det = round(float(np.linalg.det(a)))
        if det not in (-1, 1):
            raise ValueError("matrix must be unimodular for an exact inverse")

    def _inverse_matrix(self) -> np.ndarray:
        a = np.array(self.matrix, dtype=float)
        inv = np.rint(np.linalg.inv(a)).astype(int)
        if not np.array_equal(np.array(self.matrix) @ inv, np.eye(self.chart.dim, dtype=int)):
            raise ValueError("matrix inverse is not integer")
        return inv

    def inverse(self) -> "IntegerAffineMap":
        inv = self._inverse_matrix()
        boff = -inv @ np.array(self.offset, dtype=float)
        return IntegerAffineMap(
            self.chart,
            tuple(tuple(int(v) for v in row) for row in inv),
            tuple(float(v) for v in boff),
        )

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        a = np.array(self.matrix, dtype=float)
        return pts @ a.T + np.array(self.offset)

    def _substitution(self) -> dict[str, tuple[dict[str, int], float]]:
        # substitute each coordinate by its image expression
        names = self.chart.coord_names()
        sub: dict[str, tuple[dict[str, int], float]] = {}
        for i, name in enumerate(names):
            linear = {names[j]: int(m) for j, m in enumerate(self.matrix[i]) if m}
            sub[name] = (linear, float(self.offset[i]))
        return sub

    def compose_with_expr(self, f: Expr) -> Expr:
        """f after this map, i.e. f(A x + b) as an expression in x."""
        return f.substitute_integer_affine(self._substitution())

    def pushforward(self, X: VectorField) -> VectorField:
        """Transport a vector field: (f_* X)(q) = A . X(f^{-1}(q))."""
        inv_sub = self.inverse()._substitution()
        comps: list[ScalarLike] = []
        for i in range(self.chart.dim):
            acc = self.chart.zero()
            for j, m in enumerate(self.matrix[i]):
                if not m:
                    continue
                xj = X.components[j]
                if not isinstance(xj, Expr):
                    raise ValueError("pushforward requires exact components")
                acc = acc + float(m) * xj.substitute_integer_affine(inv_sub)
            comps.append(acc)
        return VectorField(self.chart, tuple(comps), X.label)

    def pullback(self, alpha: OneForm) -> OneForm:
        """(f^* alpha)_j = sum_i A_ij (alpha_i after f)."""
        comps: list[ScalarLike] = []
        for j in range(self.chart.dim):
            acc = self.chart.zero()
            for i in range(self.chart.dim):
                m = self.matrix[i][j]
                if not m:
                    continue
                ai = alpha.components[i]
                if not isinstance(ai, Expr):
                    raise ValueError("pullback requires exact components")
                acc = acc + float(m) * self.compose_with_expr(ai)
            comps.append(acc)
        return OneForm(self.chart, tuple(comps), alpha.label)


# -- batch evaluation and rank -------------------------------------------------


def batch_eval_scalars(scalars: Sequence[ScalarLike], pts: np.ndarray) -> np.ndarray:
    """Evaluate scalars on stacked points; result has shape (npts, len(scalars))."""
    pts = np.asarray(pts, float)
    cols = [np.broadcast_to(np.asarray(s.compile()(pts), float), pts.shape[:-1]) for s in scalars]
    return np.stack(cols, axis=-1)


def field_matrix(fields: Sequence[VectorField], pts: np.ndarray) -> np.ndarray:
    """Stack field values into shape (npts, n_fields, dim)."""
    rows = [batch_eval_scalars(f.components, pts) for f in fields]
    return np.stack(rows, axis=-2)


def pointwise_rank(mats: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Numeric rank and rank gap of a batch of matrices.

    The gap at a point is the smallest singular value still counted toward
    the rank, i.e. the margin by which the rank certificate holds.
    """
    mats = np.asarray(mats, float)
    s = np.linalg.svd(mats, compute_uv=False)
    ranks = (s > tol).sum(axis=-1)
    idx = np.maximum(ranks - 1, 0)
    gaps = np.where(ranks > 0, np.take_along_axis(s, idx[..., None], axis=-1)[..., 0], 0.0)
    return ranks, gaps
