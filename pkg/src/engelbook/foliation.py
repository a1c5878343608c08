"""Surface pullbacks, characteristic foliations, and the disk constructor.

This module owns everything that happens on 2-dimensional pieces: pulling
forms back to embedded surfaces (an exact route for coordinate-slice
embeddings and a numeric Jacobian route kept deliberately separate), slopes
of linear torus foliations, leaf tracing on annuli, locating and classifying
the singularities of a direction field, and the construction of a contact
form on a disk bundle with a prescribed odd number of boundary twists.

The constructor realizes the form

    alpha = u dx + beta,
    beta  = (u_q - c q + s p / rho) dp + (-u_p + c p + s q / rho) dq,

with u a chain of truncated Gaussian peaks over a negative floor, lifted
back to 1 through a radial wall, and c, s radial profiles that keep the
contact coefficient positive while steering the classifier field

    V = grad(u) - c rho e_rho + s e_theta

so that its zeros are exactly the prescribed singularities.  Outside a
stated radius u is exactly 1, c is exactly 1, and s is exactly 0, so beta
agrees with p dq - q dp to the last float bit.  All certificates (contact
positivity, boundary exactness, singularity counts, index identities) are
checked numerically on dense grids before the object is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .charts import (
    Chart,
    Interval,
    NumericScalar,
    OneForm,
    TwoForm,
    VectorField,
    batch_eval_scalars,
    scalar_neg,
)
from .trigpoly import (
    KIND_ANGULAR,
    KIND_POLYNOMIAL,
    Expr,
    Mode,
    TrigTerm,
)

__all__ = [
    "ClassifierField",
    "DiskContactForm",
    "NumericEmbedding",
    "SingularityReport",
    "SliceEmbedding",
    "annulus_foliation_check",
    "boundary_winding_vs_index",
    "characteristic_direction",
    "classifier_boundary_winding",
    "construct_xi_prime",
    "find_and_classify",
    "torus_slope",
    "trace_leaf",
]


# -- embeddings ----------------------------------------------------------------


def _reindex_expr(expr: Expr, surface: Chart, name_map: Mapping[str, str]) -> Expr:
    """Transplant an expression onto surface coordinates via a name map."""
    positions = []
    for c in expr.coords:
        target = name_map[c.name]
        j = surface.index(target)
        if surface.coords[j].kind != c.kind:
            raise ValueError(
                f"cannot transplant {c.name!r} ({c.kind}) onto "
                f"{target!r} ({surface.coords[j].kind})"
            )
        positions.append(j)
    terms = []
    for t in expr.terms:
        powers = [0] * surface.dim
        freqs = [0] * surface.dim
        for src, dst in enumerate(positions):
            powers[dst] += t.powers[src]
            freqs[dst] += t.freqs[src]
        terms.append(TrigTerm(t.coeff, tuple(powers), t.mode, tuple(freqs), t.phase))
    return Expr.from_terms(surface.coords, terms)


@dataclass(frozen=True)
class SliceEmbedding:
    """An exact embedding: each ambient coordinate is a surface coordinate
    or a constant.

    Pullbacks along such embeddings stay in the exact expression class, so
    slopes and characteristic directions computed from them carry no
    numerical error beyond float arithmetic.
    """

    surface: Chart
    ambient: Chart
    assignment: Mapping[str, "str | float"]

    def __post_init__(self) -> None:
        for c in self.ambient.coords:
            if c.name not in self.assignment:
                raise ValueError(f"ambient coordinate {c.name!r} is unassigned")
        for name, value in self.assignment.items():
            self.ambient.index(name)
            if isinstance(value, str):
                self.surface.index(value)

    def _constants(self) -> dict[str, float]:
        return {
            name: float(v) for name, v in self.assignment.items() if not isinstance(v, str)
        }

    def _name_map(self) -> dict[str, str]:
        return {name: v for name, v in self.assignment.items() if isinstance(v, str)}

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        cols = []
        for c in self.ambient.coords:
            v = self.assignment[c.name]
            if isinstance(v, str):
                cols.append(pts[..., self.surface.index(v)])
            else:
                cols.append(np.full(pts.shape[:-1], float(v)))
        return np.stack(cols, axis=-1)

    def pullback_oneform(self, alpha: OneForm) -> OneForm:
        consts = self._constants()
        name_map = self._name_map()
        comps: list[Expr] = [self.surface.zero() for _ in range(self.surface.dim)]
        for i, c in enumerate(self.ambient.coords):
            target = self.assignment[c.name]
            if not isinstance(target, str):
                continue
            a = alpha.components[i]
            if not isinstance(a, Expr):
                raise ValueError("exact pullback needs exact components")
            restricted = a.substitute_constants(consts) if consts else a
            j = self.surface.index(target)
            comps[j] = comps[j] + _reindex_expr(restricted, self.surface, name_map)
        return OneForm(self.surface, tuple(comps), alpha.label)

    def pullback_twoform(self, omega: TwoForm) -> Expr:
        """Coefficient of the pulled-back area form on the 2-surface."""
        if self.surface.dim != 2:
            raise ValueError("two-form pullback needs a 2-dimensional surface")
        consts = self._constants()
        name_map = self._name_map()
        u_name, v_name = (c.name for c in self.surface.coords)
        out = self.surface.zero()
        for (i, j), w in zip(omega.pairs, omega.components):
            ti = self.assignment[omega.chart.coords[i].name]
            tj = self.assignment[omega.chart.coords[j].name]
            if not (isinstance(ti, str) and isinstance(tj, str)):
                continue
            if {ti, tj} != {u_name, v_name}:
                continue
            if not isinstance(w, Expr):
                raise ValueError("exact pullback needs exact components")
            restricted = w.substitute_constants(consts) if consts else w
            sign = 1.0 if (ti, tj) == (u_name, v_name) else -1.0
            out = out + sign * _reindex_expr(restricted, self.surface, name_map)
        return out


@dataclass(frozen=True)
class NumericEmbedding:
    """An embedding given by point and Jacobian closures.

    This is the numeric pullback route; it shares no code with the exact
    route above.
    """

    surface: Chart
    ambient: Chart
    fn: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(pts, float)), float)

    def pullback_oneform(self, alpha: OneForm) -> OneForm:
        amb_fns = [c.compile() for c in alpha.components]
        fn = self.fn
        jac = self.jacobian

        def make_component(j: int):
            def comp(pts: np.ndarray) -> np.ndarray:
                pts = np.asarray(pts, float)
                amb = np.asarray(fn(pts), float)
                J = np.asarray(jac(pts), float)
                out = np.zeros(pts.shape[:-1])
                for i, f in enumerate(amb_fns):
                    out = out + f(amb) * J[..., i, j]
                return out

            return comp

        comps = tuple(
            NumericScalar(self.surface.coords, make_component(j))
            for j in range(self.surface.dim)
        )
        return OneForm(self.surface, comps, alpha.label)

    def pullback_twoform(self, omega: TwoForm) -> NumericScalar:
        if self.surface.dim != 2:
            raise ValueError("two-form pullback needs a 2-dimensional surface")
        comp_fns = [(pair, c.compile()) for pair, c in zip(omega.pairs, omega.components)]
        fn = self.fn
        jac = self.jacobian

        def coeff(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, float)
            amb = np.asarray(fn(pts), float)
            J = np.asarray(jac(pts), float)
            out = np.zeros(pts.shape[:-1])
            for (i, j), f in comp_fns:
                minor = J[..., i, 0] * J[..., j, 1] - J[..., i, 1] * J[..., j, 0]
                out = out + f(amb) * minor
            return out

        return NumericScalar(self.surface.coords, coeff)


# -- torus slopes and characteristic directions ---------------------------------


def torus_slope(pulled: OneForm, tol: float = 1e-9, samples: int = 16) -> float:
    """Slope of the linear kernel foliation of a constant form on a 2-torus.

    The pulled-back form must have constant coefficients (c1, c2) within
    ``tol``; the kernel line of c1 du + c2 dv has slope dv/du = -c1/c2,
    infinite when c2 vanishes.
    """
    chart = pulled.chart
    if chart.dim != 2:
        raise ValueError("torus_slope expects a 2-dimensional chart")
    values = []
    for comp in pulled.components:
        if isinstance(comp, Expr):
            # bound |non-constant part| by its coefficient sum; valid because
            # torus coordinates are angular, so terms carry no monomial factors
            const = 0.0
            drift = 0.0
            for t in comp.terms:
                if t.mode == Mode.CONST and not any(t.powers) and not any(t.freqs):
                    const += t.coeff
                else:
                    drift += abs(t.coeff)
            if drift > tol:
                raise ValueError("pulled-back form is not constant: not a linear foliation")
            values.append(const)
        else:
            pts = chart.sample_grid(samples)
            vals = batch_eval_scalars([comp], pts)[:, 0]
            if vals.max() - vals.min() > tol:
                raise ValueError("pulled-back form is not constant: not a linear foliation")
            values.append(float(vals.mean()))
    c1, c2 = values
    if abs(c2) <= tol:
        return math.inf
    return -c1 / c2


def characteristic_direction(pulled: OneForm) -> VectorField:
    """Kernel direction (-c2, c1) of a 1-form c1 du + c2 dv on a surface."""
    chart = pulled.chart
    if chart.dim != 2:
        raise ValueError("characteristic_direction expects a 2-dimensional chart")
    c1, c2 = pulled.components
    return VectorField(chart, (scalar_neg(c2), c1), label="char-direction")


# -- leaf tracing on annuli ------------------------------------------------------


def trace_leaf(
    direction: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    step: float,
    max_arc: float,
    inside: Callable[[np.ndarray], np.ndarray],
    wrap: tuple[bool, ...] = (False, False),
    max_steps: "int | None" = None,
) -> tuple[np.ndarray, bool, int]:
    """Fixed-step RK4 integration of a normalized direction field.

    Returns (end_point, exited, n_steps).  ``exited`` is False when the
    leaf either closed up (returned to its start) or exhausted ``max_arc``.
    ``wrap`` marks angular coordinates so closure is detected modulo their
    period.
    """
    z = np.asarray(start, float).copy()
    z0 = z.copy()
    n_max = max_steps if max_steps is not None else int(math.ceil(max_arc / step))

    def unit(p: np.ndarray) -> np.ndarray:
        v = np.asarray(direction(p[None, :]), float)[0]
        n = np.linalg.norm(v)
        if n < 1e-14:
            raise ValueError("direction field vanishes on the traced leaf")
        return v / n

    def separation(a: np.ndarray, b: np.ndarray) -> float:
        d = a - b
        for i, w in enumerate(wrap):
            if w:
                d[i] = (d[i] + math.pi) % math.tau - math.pi
        return float(np.linalg.norm(d))

    for i in range(1, n_max + 1):
        k1 = unit(z)
        k2 = unit(z + 0.5 * step * k1)
        k3 = unit(z + 0.5 * step * k2)
        k4 = unit(z + step * k3)
        z = z + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not inside(z):
            return z, True, i
        # closed-leaf detection once the trace is clearly under way
        if i > 100 and separation(z, z0) < 0.5 * step:
            return z, False, i
    return z, False, n_max


def annulus_foliation_check(
    pulled: OneForm,
    v_range: tuple[float, float],
    n_seeds: int = 8,
    step: float = 1e-3,
    arc_factor: float = 50.0,
    retrace_tol: float = 1e-4,
    name: str = "annulus_foliation",
):
    """Every leaf of the kernel foliation must cross the annulus.

    Traces the normalized kernel direction forward and backward from seeds
    on the middle circle; a passing foliation exits through both boundary
    components, and re-integrating backward from the forward endpoint
    reproduces the seed within ``retrace_tol``.  Closed or trapped leaves
    fail.
    """
    from .verify import CheckReport

    chart = pulled.chart
    lo, hi = v_range
    width = hi - lo
    max_arc = arc_factor * width
    c1, c2 = (c.compile() for c in pulled.components)

    def direction(pts: np.ndarray) -> np.ndarray:
        return np.stack([-c2(pts), c1(pts)], axis=-1)

    def neg_direction(pts: np.ndarray) -> np.ndarray:
        return -direction(pts)

    def inside(z: np.ndarray) -> bool:
        return bool(lo < z[1] < hi)

    failures = []
    headroom = math.inf
    mid = 0.5 * (lo + hi)
    wrap = (chart.coords[0].is_angular, chart.coords[1].is_angular)
    for u0 in np.linspace(0.0, math.tau, n_seeds, endpoint=False):
        seed = np.array([u0, mid])
        fwd_end, fwd_exit, fwd_steps = trace_leaf(
            direction, seed, step, max_arc, inside, wrap
        )
        bwd_end, bwd_exit, bwd_steps = trace_leaf(
            neg_direction, seed, step, max_arc, inside, wrap
        )
        crossed = (
            fwd_exit
            and bwd_exit
            and ((fwd_end[1] >= hi) != (bwd_end[1] >= hi))
        )
        # reversibility: integrating back over the same step count must
        # reproduce the seed
        retrace_ok = True
        if fwd_exit:
            back, _, _ = trace_leaf(
                neg_direction,
                fwd_end,
                step,
                max_arc,
                lambda z: True,
                wrap,
                max_steps=fwd_steps,
            )
            retrace_ok = bool(np.linalg.norm(back - seed) <= retrace_tol)
        if not (crossed and retrace_ok):
            failures.append(
                {
                    "point": {"u": float(u0), "v": float(mid)},
                    "value": float(fwd_end[1] if fwd_exit else math.nan),
                }
            )
        else:
            used = (fwd_steps + bwd_steps) * step
            headroom = min(headroom, 1.0 - used / max_arc)
    passed = not failures
    return CheckReport(
        name=name,
        passed=passed,
        n_points=n_seeds,
        min_gap=0.0 if not passed else float(headroom),
        failures=tuple(failures[:5]),
        details={"step": step, "max_arc": max_arc},
    )


# -- singularities of direction fields -------------------------------------------


@dataclass(frozen=True)
class ClassifierField:
    """A plane direction field with analytic Jacobian and a signing level.

    ``value`` maps (..., 2) points to (..., 2) vectors; ``jacobian`` to
    (..., 2, 2); ``level`` is the scalar whose sign at a zero decides
    between the positive and negative singularity classes.
    """

    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    level: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SingularityReport:
    zeros: tuple[dict, ...]
    counts: dict
    euler_identity: int
    relative_euler: int
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "e_plus": int(self.counts["e_plus"]),
            "e_minus": int(self.counts["e_minus"]),
            "h_plus": int(self.counts["h_plus"]),
            "h_minus": int(self.counts["h_minus"]),
            "euler_identity": int(self.euler_identity),
            "relative_euler": int(self.relative_euler),
        }


def find_and_classify(
    classifier: ClassifierField,
    radius: float = 1.0,
    grid_n: int = 161,
    newton_iters: int = 60,
    residual_tol: float = 1e-10,
    dedupe_tol: float = 1e-6,
) -> SingularityReport:
    """Locate and classify the zeros of a plane direction field on a disk.

    Every grid point seeds a batched Newton iteration with the analytic
    Jacobian; converged points are deduplicated and classified by the sign
    of the Jacobian determinant (positive: elliptic, negative: hyperbolic)
    and the sign of the level function.
    """
    axis = np.linspace(-0.98 * radius, 0.98 * radius, grid_n)
    P, Q = np.meshgrid(axis, axis, indexing="ij")
    seeds = np.stack([P.reshape(-1), Q.reshape(-1)], axis=-1)
    seeds = seeds[np.linalg.norm(seeds, axis=-1) <= 0.98 * radius]

    z = seeds.copy()
    alive = np.ones(len(z), dtype=bool)
    for _ in range(newton_iters):
        V = classifier.value(z)
        if not alive.any():
            break
        J = classifier.jacobian(z)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(det) > 1e-300
        inv_det = np.where(ok, det, 1.0)
        step_p = (J[:, 1, 1] * V[:, 0] - J[:, 0, 1] * V[:, 1]) / inv_det
        step_q = (-J[:, 1, 0] * V[:, 0] + J[:, 0, 0] * V[:, 1]) / inv_det
        step = np.stack([step_p, step_q], axis=-1)
        step[~ok] = 0.0
        alive &= ok & (np.linalg.norm(z, axis=-1) < 2.0 * radius)
        z = np.where(alive[:, None], z - step, z)

    V = classifier.value(z)
    good = (
        np.isfinite(z).all(axis=-1)
        & (np.linalg.norm(V, axis=-1) <= residual_tol)
        & (np.linalg.norm(z, axis=-1) < radius)
    )
    zs = z[good]

    # dedupe by spatial proximity
    unique: list[np.ndarray] = []
    for p in zs:
        if all(np.linalg.norm(p - q) > dedupe_tol for q in unique):
            unique.append(p)
    unique.sort(key=lambda p: (round(float(p[0]), 9), round(float(p[1]), 9)))

    zeros = []
    counts = {"e_plus": 0, "e_minus": 0, "h_plus": 0, "h_minus": 0}
    degenerate = False
    if unique:
        arr = np.stack(unique)
        jac = classifier.jacobian(arr)
        dets = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        levels = classifier.level(arr)
        residuals = np.linalg.norm(classifier.value(arr), axis=-1)
        for p, det, lev, res in zip(arr, dets, levels, residuals):
            if abs(det) < 1e-8 or abs(lev) < 1e-8:
                degenerate = True
            kind = "elliptic" if det > 0 else "hyperbolic"
            sign = 1 if lev > 0 else -1
            key = ("e" if kind == "elliptic" else "h") + ("_plus" if sign > 0 else "_minus")
            counts[key] += 1
            zeros.append(
                {
                    "p": float(p[0]),
                    "q": float(p[1]),
                    "type": kind,
                    "sign": sign,
                    "det": float(det),
                    "level": float(lev),
                    "residual": float(res),
                }
            )
    euler = counts["e_plus"] + counts["e_minus"] - counts["h_plus"] - counts["h_minus"]
    relative = counts["e_plus"] - counts["e_minus"] - counts["h_plus"] + counts["h_minus"]
    return SingularityReport(tuple(zeros), counts, euler, relative, degenerate)


def classifier_boundary_winding(
    classifier: ClassifierField, radius: float, n_samples: int = 2048
) -> float:
    """Turns of the field along the positively oriented circle of a radius."""
    t = np.linspace(0.0, math.tau, n_samples, endpoint=False)
    circle = radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
    V = classifier.value(circle)
    ang = np.arctan2(V[:, 1], V[:, 0])
    ang = np.concatenate([ang, ang[:1]])
    d = np.diff(ang)
    d = (d + math.pi) % math.tau - math.pi
    return float(d.sum() / math.tau)


def boundary_winding_vs_index(
    boundary_field: VectorField,
    frame: Sequence[VectorField],
    loop,
    report: SingularityReport,
    n_samples: int = 1024,
) -> dict:
    """Compare a boundary field's frame winding against the relative index sum."""
    from .invariants import twisting_number

    w = twisting_number(boundary_field, frame, loop, n_samples=n_samples)
    return {
        "winding": int(w.value),
        "winding_residual": float(w.residual),
        "relative_euler": int(report.relative_euler),
        "match": bool(w.value == report.relative_euler),
    }


# -- the disk constructor ---------------------------------------------------------


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _smoothstep_d1(t: np.ndarray) -> np.ndarray:
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * tc * tc * (1.0 - tc) * (1.0 - tc), 0.0)


def _smoothstep_d2(t: np.ndarray) -> np.ndarray:
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inside, 60.0 * tc * (2.0 * tc - 1.0) * (tc - 1.0), 0.0)


@dataclass(frozen=True)
class _RadialRamps:
    """base + sum of smoothstep transitions, with first two derivatives."""

    base: float
    ramps: tuple[tuple[float, float, float], ...]  # (start, end, jump)
    final: float | None = None  # exact value clamped past the last ramp

    def value(self, rho: np.ndarray) -> np.ndarray:
        out = np.full(np.shape(rho), self.base)
        for a, b, jump in self.ramps:
            out = out + jump * _smoothstep((rho - a) / (b - a))
        if self.final is not None:
            out = np.where(rho >= self.ramps[-1][1], self.final, out)
        return out

    def d1(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros(np.shape(rho))
        for a, b, jump in self.ramps:
            out = out + (jump / (b - a)) * _smoothstep_d1((rho - a) / (b - a))
        return out


def _gaussian_bundle(
    centers: np.ndarray, amplitude: float, width: float, t0: float, t1: float
):
    """Value, gradient, Hessian closures for a sum of truncated Gaussians.

    Each bump is exp(-d^2 / 2 w^2) faded to exactly zero between t0*w and
    t1*w away from its center by a reversed smoothstep.
    """
    w2 = width * width
    fade_lo = t0 * width
    fade_w = (t1 - t0) * width

    def per_bump(pts: np.ndarray, center: np.ndarray):
        dp = pts[..., 0] - center[0]
        dq = pts[..., 1] - center[1]
        d = np.hypot(dp, dq)
        E = np.exp(-0.5 * d * d / w2)
        t = (d - fade_lo) / fade_w
        chi = 1.0 - _smoothstep(t)
        chi_d1 = -_smoothstep_d1(t) / fade_w
        chi_d2 = -_smoothstep_d2(t) / (fade_w * fade_w)
        E_d1 = -(d / w2) * E
        E_d2 = (d * d / (w2 * w2) - 1.0 / w2) * E
        g = E * chi
        g1 = E_d1 * chi + E * chi_d1
        g2 = E_d2 * chi + 2.0 * E_d1 * chi_d1 + E * chi_d2
        return dp, dq, d, g, g1, g2

    def value(pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[:-1])
        for center in centers:
            out = out + amplitude * per_bump(pts, center)[3]
        return out

    def grad(pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[:-1] + (2,))
        for center in centers:
            dp, dq, d, _, g1, _ = per_bump(pts, center)
            safe = np.maximum(d, 1e-30)
            out[..., 0] += amplitude * g1 * dp / safe
            out[..., 1] += amplitude * g1 * dq / safe
        return out

    def hess(pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[:-1] + (2, 2))
        for center in centers:
            dp, dq, d, _, g1, g2 = per_bump(pts, center)
            near = d < 1e-9
            safe = np.maximum(d, 1e-30)
            up, uq = dp / safe, dq / safe
            radial = g1 / safe
            hpp = np.where(near, g2, g2 * up * up + radial * uq * uq)
            hqq = np.where(near, g2, g2 * uq * uq + radial * up * up)
            hpq = np.where(near, 0.0, (g2 - radial) * up * uq)
            out[..., 0, 0] += amplitude * hpp
            out[..., 1, 1] += amplitude * hqq
            out[..., 0, 1] += amplitude * hpq
            out[..., 1, 0] += amplitude * hpq
        return out

    return value, grad, hess


@dataclass(frozen=True)
class _DiskPieces:
    """Closures for u, c, s and their derivatives on the page disk."""

    u: Callable
    grad_u: Callable
    hess_u: Callable
    c: Callable
    c1: Callable
    s: Callable
    s1: Callable


def _assemble_pieces(k: int, params: dict) -> _DiskPieces:
    e = (k + 1) // 2
    width = params["width"]
    spacing = params["spacing"] * width
    amplitude = params["amplitude"]
    floor = params["floor"]
    wall_lo, wall_hi = params["wall"]
    trunc_lo, trunc_hi = params["trunc"]

    offsets = (np.arange(e) - 0.5 * (e - 1)) * spacing
    centers = np.stack([offsets, np.zeros(e)], axis=-1)
    p_max = float(np.abs(offsets).max()) if e else 0.0
    cluster_end = p_max + trunc_hi * width

    g_val, g_grad, g_hess = _gaussian_bundle(centers, amplitude, width, trunc_lo, trunc_hi)

    one_plus = 1.0 + floor

    def u(pts: np.ndarray) -> np.ndarray:
        rho = np.hypot(pts[..., 0], pts[..., 1])
        t = (rho - wall_lo) / (wall_hi - wall_lo)
        # written as 1 - (1+h)(1-sigma) so the outside value is exactly 1
        return 1.0 - one_plus * (1.0 - _smoothstep(t)) + g_val(pts)

    def wall_d(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = (rho - wall_lo) / (wall_hi - wall_lo)
        d = wall_hi - wall_lo
        return one_plus * _smoothstep_d1(t) / d, one_plus * _smoothstep_d2(t) / (d * d)

    def grad_u(pts: np.ndarray) -> np.ndarray:
        rho = np.hypot(pts[..., 0], pts[..., 1])
        w1, _ = wall_d(rho)
        safe = np.maximum(rho, 1e-30)
        out = g_grad(pts)
        out[..., 0] += w1 * pts[..., 0] / safe
        out[..., 1] += w1 * pts[..., 1] / safe
        return out

    def hess_u(pts: np.ndarray) -> np.ndarray:
        rho = np.hypot(pts[..., 0], pts[..., 1])
        w1, w2 = wall_d(rho)
        safe = np.maximum(rho, 1e-30)
        up, uq = pts[..., 0] / safe, pts[..., 1] / safe
        radial = w1 / safe
        out = g_hess(pts)
        out[..., 0, 0] += w2 * up * up + radial * uq * uq
        out[..., 1, 1] += w2 * uq * uq + radial * up * up
        out[..., 0, 1] += (w2 - radial) * up * uq
        out[..., 1, 0] += (w2 - radial) * up * uq
        return out

    # c and s switch on across [ca, cb], radii chosen so every point of the
    # transition band is still within the live tail of some peak: the band
    # must finish before the first exactly-flat pocket, which appears at
    # distance trunc_hi * width from the innermost peak
    ca = params["c_on"][0] * width
    cb = params["c_on"][1] * width
    p_inner = float(np.abs(offsets).min()) if e else 0.0
    flat_onset = math.sqrt(max((trunc_hi * width) ** 2 - p_inner**2, 0.0))
    if cb >= flat_onset:
        raise ValueError("profile transition band reaches a flat pocket")
    c_rise = params["c_rise"]
    c_profile = _RadialRamps(
        0.0,
        ((ca, cb, -params["c_dip"]), (c_rise[0], c_rise[1], 1.0 + params["c_dip"])),
        final=1.0,
    )
    s_fall = params["s_fall"]
    s_profile = _RadialRamps(
        0.0,
        ((ca, cb, params["swirl"]), (s_fall[0], s_fall[1], -params["swirl"])),
        final=0.0,
    )

    if cluster_end >= wall_lo:
        raise ValueError("peak cluster does not fit inside the wall radius")

    return _DiskPieces(
        u=u,
        grad_u=grad_u,
        hess_u=hess_u,
        c=c_profile.value,
        c1=c_profile.d1,
        s=s_profile.value,
        s1=s_profile.d1,
    )


def _classifier_from_pieces(pieces: _DiskPieces) -> ClassifierField:
    def value(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        rho = np.hypot(pts[..., 0], pts[..., 1])
        safe = np.maximum(rho, 1e-30)
        g = pieces.grad_u(pts)
        c = pieces.c(rho)
        s = pieces.s(rho)
        vp = g[..., 0] - c * pts[..., 0] - s * pts[..., 1] / safe
        vq = g[..., 1] - c * pts[..., 1] + s * pts[..., 0] / safe
        return np.stack([vp, vq], axis=-1)

    def jacobian(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        p, q = pts[..., 0], pts[..., 1]
        rho = np.hypot(p, q)
        safe = np.maximum(rho, 1e-30)
        c = pieces.c(rho)
        c1 = pieces.c1(rho)
        s = pieces.s(rho)
        s1 = pieces.s1(rho)
        J = pieces.hess_u(pts).copy()
        # -d(c rho e_rho) = -(c I + (c'/rho) z z^T)
        J[..., 0, 0] -= c + c1 * p * p / safe
        J[..., 1, 1] -= c + c1 * q * q / safe
        J[..., 0, 1] -= c1 * p * q / safe
        J[..., 1, 0] -= c1 * p * q / safe
        # +d(s e_theta), e_theta = (-q, p)/rho
        r3 = safe * safe * safe
        J[..., 0, 0] += -s1 * q * p / (safe * safe) + s * q * p / r3
        J[..., 0, 1] += -s1 * q * q / (safe * safe) + s * (q * q / r3 - 1.0 / safe)
        J[..., 1, 0] += s1 * p * p / (safe * safe) + s * (1.0 / safe - p * p / r3)
        J[..., 1, 1] += s1 * p * q / (safe * safe) - s * p * q / r3
        return J

    def level(pts: np.ndarray) -> np.ndarray:
        return pieces.u(np.asarray(pts, float))

    return ClassifierField(value, jacobian, level)


def _contact_coefficient(pieces: _DiskPieces) -> Callable[[np.ndarray], np.ndarray]:
    """The top-wedge coefficient F of u dx + beta in coordinates (x, p, q)."""

    def F(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        p, q = pts[..., 0], pts[..., 1]
        rho = np.hypot(p, q)
        safe = np.maximum(rho, 1e-30)
        u = pieces.u(pts)
        g = pieces.grad_u(pts)
        H = pieces.hess_u(pts)
        lap = H[..., 0, 0] + H[..., 1, 1]
        c = pieces.c(rho)
        c1 = pieces.c1(rho)
        s = pieces.s(rho)
        du_rho = (g[..., 0] * p + g[..., 1] * q) / safe
        du_theta = p * g[..., 1] - q * g[..., 0]
        grad_sq = g[..., 0] ** 2 + g[..., 1] ** 2
        return u * (-lap + 2.0 * c + rho * c1) + grad_sq - c * rho * du_rho + s * du_theta / safe

    return F


def _beta_scalars(pieces: _DiskPieces, coords) -> tuple[NumericScalar, NumericScalar]:
    """beta components on the bundle chart (x, p, q) with analytic partials."""

    def split(pts3: np.ndarray) -> np.ndarray:
        return np.asarray(pts3, float)[..., 1:]

    def beta1(pts3):
        pts = split(pts3)
        p, q = pts[..., 0], pts[..., 1]
        rho = np.hypot(p, q)
        safe = np.maximum(rho, 1e-30)
        return pieces.grad_u(pts)[..., 1] - pieces.c(rho) * q + pieces.s(rho) * p / safe

    def beta2(pts3):
        pts = split(pts3)
        p, q = pts[..., 0], pts[..., 1]
        rho = np.hypot(p, q)
        safe = np.maximum(rho, 1e-30)
        return -pieces.grad_u(pts)[..., 0] + pieces.c(rho) * p + pieces.s(rho) * q / safe

    def d_beta(pts3, which: int, by: int) -> np.ndarray:
        pts = split(pts3)
        p, q = pts[..., 0], pts[..., 1]
        rho = np.hypot(p, q)
        safe = np.maximum(rho, 1e-30)
        r2 = safe * safe
        r3 = r2 * safe
        H = pieces.hess_u(pts)
        c = pieces.c(rho)
        c1 = pieces.c1(rho)
        s = pieces.s(rho)
        s1 = pieces.s1(rho)
        if which == 1 and by == 1:  # d beta1 / dp
            return H[..., 1, 0] - c1 * p * q / safe + s1 * p * p / r2 + s * (1.0 / safe - p * p / r3)
        if which == 1 and by == 2:  # d beta1 / dq
            return H[..., 1, 1] - c - c1 * q * q / safe + s1 * p * q / r2 - s * p * q / r3
        if which == 2 and by == 1:  # d beta2 / dp
            return -H[..., 0, 0] + c + c1 * p * p / safe + s1 * p * q / r2 - s * q * p / r3
        # d beta2 / dq
        return -H[..., 0, 1] + c1 * q * p / safe + s1 * q * q / r2 + s * (1.0 / safe - q * q / r3)

    def zero(pts3):
        return np.zeros(np.asarray(pts3, float).shape[:-1])

    b1 = NumericScalar(
        coords,
        beta1,
        (zero, lambda pts3: d_beta(pts3, 1, 1), lambda pts3: d_beta(pts3, 1, 2)),
    )
    b2 = NumericScalar(
        coords,
        beta2,
        (zero, lambda pts3: d_beta(pts3, 2, 1), lambda pts3: d_beta(pts3, 2, 2)),
    )
    return b1, b2


@dataclass(frozen=True)
class DiskContactForm:
    """A verified contact form on the disk bundle with k boundary twists."""

    k: int
    bundle_chart: Chart
    page_chart: Chart
    alpha: OneForm
    classifier: ClassifierField
    singularities: SingularityReport
    contact_margin: float
    boundary_exact_radius: float
    boundary_residual: float
    params: dict
    certificates: dict
    passed: bool
    exact: bool


def _default_disk_params(k: int) -> dict:
    e = (k + 1) // 2
    width = 0.3 / (1.6 * (e - 1) + 6.0)
    return {
        "width": width,
        "spacing": 3.2,
        "amplitude": 0.85,
        "floor": 0.6,
        "c_dip": 0.2,
        "swirl": 0.3,
        "c_on": (2.5, 5.0),  # transition band radii, in widths from the origin
        "wall": (0.40, 0.60),
        "c_rise": (0.50, 0.68),
        "s_fall": (0.70, 0.80),
        "trunc": (5.0, 6.0),
        "exact_radius": 0.80,
    }


_RETRY_TWEAKS: tuple[dict, ...] = (
    {},
    {"amplitude": 0.9, "floor": 0.55},
    {"width_scale": 0.9},
    {"spacing": 3.4},
    {"width_scale": 0.85, "spacing": 3.0, "c_dip": 0.25},
)


def _disk_charts() -> tuple[Chart, Chart]:
    box = Interval(-1.0, 1.0)
    bundle = Chart.make(
        "disk-bundle",
        [("x", KIND_ANGULAR), ("p", KIND_POLYNOMIAL, box), ("q", KIND_POLYNOMIAL, box)],
    )
    page = Chart.make(
        "page-disk",
        [("p", KIND_POLYNOMIAL, box), ("q", KIND_POLYNOMIAL, box)],
    )
    return bundle, page


def _exact_disk_form() -> DiskContactForm:
    """The k = 1 model: u = 1, beta = p dq - q dp, all components exact."""
    bundle, page = _disk_charts()
    alpha = bundle.one_form({"x": 1.0, "p": "-q", "q": "p"})

    def value(pts):
        return -np.asarray(pts, float)

    def jacobian(pts):
        pts = np.asarray(pts, float)
        J = np.zeros(pts.shape[:-1] + (2, 2))
        J[..., 0, 0] = -1.0
        J[..., 1, 1] = -1.0
        return J

    def level(pts):
        return np.ones(np.asarray(pts, float).shape[:-1])

    classifier = ClassifierField(value, jacobian, level)
    report = find_and_classify(classifier, grid_n=41)
    certificates = {
        "contact_min": 2.0,
        "boundary_residual": 0.0,
        "classifier_boundary_turns": classifier_boundary_winding(classifier, 0.95),
        "boundary_min_speed": 0.8,
    }
    passed = (
        report.counts == {"e_plus": 1, "e_minus": 0, "h_plus": 0, "h_minus": 0}
        and report.euler_identity == 1
        and report.relative_euler == 1
    )
    return DiskContactForm(
        k=1,
        bundle_chart=bundle,
        page_chart=page,
        alpha=alpha,
        classifier=classifier,
        singularities=report,
        contact_margin=2.0,
        boundary_exact_radius=0.0,
        boundary_residual=0.0,
        params={},
        certificates=certificates,
        passed=passed,
        exact=True,
    )


def _disk_grid(radius: float, n: int) -> np.ndarray:
    axis = np.linspace(-radius, radius, n)
    P, Q = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([P.reshape(-1), Q.reshape(-1)], axis=-1)
    return pts[np.linalg.norm(pts, axis=-1) <= radius]


def _annulus_grid(r_lo: float, r_hi: float, n_r: int, n_t: int) -> np.ndarray:
    r = np.linspace(r_lo, r_hi, n_r)
    t = np.linspace(0.0, math.tau, n_t, endpoint=False)
    R, T = np.meshgrid(r, t, indexing="ij")
    return np.stack([(R * np.cos(T)).reshape(-1), (R * np.sin(T)).reshape(-1)], axis=-1)


def construct_xi_prime(
    k: int,
    overrides: Mapping[str, object] | None = None,
    contact_grid_n: int = 281,
    classify_grid_n: int = 161,
) -> DiskContactForm:
    """Build a verified contact form on the disk bundle with k boundary twists.

    k must be a positive odd integer.  The singularity counts of the page
    foliation come out as (k+1)/2 positive elliptic and (k-1)/2 negative
    hyperbolic points, the index identities hold, the contact coefficient is
    positive on a dense grid, and outside ``boundary_exact_radius`` the form
    agrees with dx + p dq - q dp exactly.  A short retry schedule over the
    shape parameters guards the certificates; the first passing parameter
    set wins.  If every attempt fails the best attempt is returned with
    ``passed`` False and the failure recorded in ``certificates``.
    """
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    if k == 1:
        return _exact_disk_form()

    expected = {"e_plus": (k + 1) // 2, "e_minus": 0, "h_plus": 0, "h_minus": (k - 1) // 2}
    best: DiskContactForm | None = None
    for tweak in _RETRY_TWEAKS:
        params = _default_disk_params(k)
        tweak = dict(tweak)
        if overrides:
            tweak.update(overrides)
        scale = tweak.pop("width_scale", None)
        params.update(tweak)
        if scale is not None:
            params["width"] *= float(scale)
        attempt = _build_disk_form(k, params, expected, contact_grid_n, classify_grid_n)
        if attempt.passed:
            return attempt
        if best is None or attempt.contact_margin > best.contact_margin:
            best = attempt
        if overrides:
            break  # explicit overrides are not retried away
    assert best is not None
    return best


def _build_disk_form(
    k: int, params: dict, expected: dict, contact_grid_n: int, classify_grid_n: int
) -> DiskContactForm:
    bundle, page = _disk_charts()
    pieces = _assemble_pieces(k, params)
    classifier = _classifier_from_pieces(pieces)
    F = _contact_coefficient(pieces)

    # contact positivity on a dense disk grid
    pts = _disk_grid(1.0, contact_grid_n)
    f_vals = F(pts)
    contact_min = float(f_vals.min())

    # boundary exactness: u == 1 and beta == p dq - q dp outside the radius
    exact_radius = float(params["exact_radius"])
    ann = _annulus_grid(exact_radius, 1.0, 24, 128)
    rho = np.hypot(ann[:, 0], ann[:, 1])
    safe = np.maximum(rho, 1e-30)
    g = pieces.grad_u(ann)
    c = pieces.c(rho)
    s = pieces.s(rho)
    b1 = g[:, 1] - c * ann[:, 1] + s * ann[:, 0] / safe
    b2 = -g[:, 0] + c * ann[:, 0] + s * ann[:, 1] / safe
    boundary_residual = float(
        max(
            np.abs(b1 - (-ann[:, 1])).max(),
            np.abs(b2 - ann[:, 0]).max(),
            np.abs(pieces.u(ann) - 1.0).max(),
        )
    )

    report = find_and_classify(classifier, grid_n=classify_grid_n)
    boundary_turns = classifier_boundary_winding(classifier, 0.5 * (exact_radius + 1.0))
    vmin_boundary = float(
        np.linalg.norm(classifier.value(ann), axis=-1).min()
    )

    certificates = {
        "contact_min": contact_min,
        "boundary_residual": boundary_residual,
        "counts": dict(report.counts),
        "expected_counts": dict(expected),
        "euler_identity": report.euler_identity,
        "relative_euler": report.relative_euler,
        "classifier_boundary_turns": boundary_turns,
        "boundary_min_speed": vmin_boundary,
        "degenerate": report.degenerate,
    }
    passed = (
        contact_min > 1e-6
        and boundary_residual <= 1e-13
        and report.counts == expected
        and not report.degenerate
        and report.euler_identity == 1
        and report.relative_euler == k
        and abs(boundary_turns - 1.0) < 0.05
        and vmin_boundary > 1e-3
    )

    b1s, b2s = _beta_scalars(pieces, bundle.coords)

    def u3(pts3):
        return pieces.u(np.asarray(pts3, float)[..., 1:])

    def u3_dp(pts3):
        return pieces.grad_u(np.asarray(pts3, float)[..., 1:])[..., 0]

    def u3_dq(pts3):
        return pieces.grad_u(np.asarray(pts3, float)[..., 1:])[..., 1]

    def zero3(pts3):
        return np.zeros(np.asarray(pts3, float).shape[:-1])

    u_scalar = NumericScalar(bundle.coords, u3, (zero3, u3_dp, u3_dq))
    alpha = OneForm(bundle, (u_scalar, b1s, b2s), label=f"disk-form-k{k}")

    return DiskContactForm(
        k=k,
        bundle_chart=bundle,
        page_chart=page,
        alpha=alpha,
        classifier=classifier,
        singularities=report,
        contact_margin=contact_min,
        boundary_exact_radius=exact_radius,
        boundary_residual=boundary_residual,
        params=dict(params),
        certificates=certificates,
        passed=passed,
        exact=False,
    )
