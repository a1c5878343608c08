"""Pointwise verification certificates with explicit margins.

Every check samples a dense set of chart points and returns a CheckReport.
Existence certificates (nonvanishing, rank growth, positivity) report the
worst margin over the sample in ``min_gap``; vanishing certificates report
the worst residual there instead, and pass when it is at most ``tol``.
Checks with an exact and a numeric route run both and refuse to pass when
the routes disagree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .charts import (
    Chart,
    OneForm,
    TwoForm,
    VectorField,
    batch_eval_scalars,
    exterior_derivative,
    field_matrix,
    lie_bracket,
    lie_derivative_oneform,
    pointwise_rank,
    scalar_mul,
    scalar_sub,
    wedge_top,
)
from .trigpoly import Expr

__all__ = [
    "CheckReport",
    "adaptedness_check",
    "contact_structure_check",
    "contact_vector_field_check",
    "even_contact_form_check",
    "even_contact_span_check",
    "engel_check",
    "family_slice_check",
    "fibration_transversality_check",
    "isotropic_line_check",
]

DEFAULT_MIN_POINTS = 1000
DEFAULT_THRESHOLD = 1e-9
DEFAULT_TOL = 1e-9
MAX_FAILURES = 5


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one pointwise verification."""

    name: str
    passed: bool
    n_points: int
    min_gap: float
    failures: tuple[dict, ...] = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "points": int(self.n_points),
            "min_gap": float(self.min_gap),
            "failures": [dict(f) for f in self.failures],
            "details": {k: self.details[k] for k in sorted(self.details)},
        }


def _grid(chart: Chart, points, min_points: int, margin: float) -> np.ndarray:
    if points is not None:
        return np.asarray(points, float)
    return chart.grid_for_min_points(min_points, margin)


def _failures(chart: Chart, pts: np.ndarray, bad: np.ndarray, values: np.ndarray) -> tuple[dict, ...]:
    idx = np.nonzero(bad)[0][:MAX_FAILURES]
    out = []
    for i in idx:
        point = {c.name: float(pts[i, k]) for k, c in enumerate(chart.coords)}
        out.append({"point": point, "value": float(values[i])})
    return tuple(out)


def _all_exact(comps: Iterable) -> bool:
    return all(isinstance(c, Expr) for c in comps)


# -- contact and even contact -------------------------------------------------


def contact_structure_check(
    alpha: OneForm,
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    threshold: float = DEFAULT_THRESHOLD,
    margin: float = 1e-3,
    name: str = "contact_structure",
) -> CheckReport:
    """Positive contact condition on a 3-chart: alpha ^ dalpha > 0.

    Positivity is measured against the chart's coordinate orientation.
    """
    chart = alpha.chart
    if chart.dim != 3:
        raise ValueError("contact_structure_check expects a 3-dimensional chart")
    pts = _grid(chart, points, min_points, margin)
    (_, coeff), = wedge_top(alpha, exterior_derivative(alpha))
    vals = batch_eval_scalars([coeff], pts)[:, 0]
    bad = vals <= threshold
    return CheckReport(
        name=name,
        passed=not bad.any(),
        n_points=len(pts),
        min_gap=float(vals.min()),
        failures=_failures(chart, pts, bad, vals),
        details={"route": "form", "orientation": "coordinate"},
    )


def even_contact_form_check(
    alpha: OneForm,
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    threshold: float = DEFAULT_THRESHOLD,
    margin: float = 1e-3,
    name: str = "even_contact_form",
) -> CheckReport:
    """Even contact condition on a 4-chart through the form route.

    alpha ^ dalpha is a 3-form with four coefficients; it must not vanish,
    so the pointwise Euclidean norm of the coefficient vector is the margin.
    """
    chart = alpha.chart
    if chart.dim != 4:
        raise ValueError("even_contact_form_check expects a 4-dimensional chart")
    pts = _grid(chart, points, min_points, margin)
    coeffs = [c for _, c in wedge_top(alpha, exterior_derivative(alpha))]
    vals = batch_eval_scalars(coeffs, pts)
    norms = np.linalg.norm(vals, axis=-1)
    bad = norms <= threshold
    return CheckReport(
        name=name,
        passed=not bad.any(),
        n_points=len(pts),
        min_gap=float(norms.min()),
        failures=_failures(chart, pts, bad, norms),
        details={"route": "form"},
    )


def even_contact_span_check(
    frame: Sequence[VectorField],
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    tol: float = DEFAULT_THRESHOLD,
    margin: float = 1e-3,
    name: str = "even_contact_span",
) -> CheckReport:
    """Even contact condition through the span route.

    The three frame fields must stay independent, and adding their pairwise
    brackets must fill the tangent space of the 4-chart.  This route shares
    no logic with the form route beyond evaluation and rank.
    """
    if len(frame) != 3:
        raise ValueError("even_contact_span_check expects three spanning fields")
    chart = frame[0].chart
    if chart.dim != 4:
        raise ValueError("even_contact_span_check expects a 4-dimensional chart")
    pts = _grid(chart, points, min_points, margin)

    mats3 = field_matrix(list(frame), pts)
    ranks3, gaps3 = pointwise_rank(mats3, tol)
    brackets = [lie_bracket(a, b) for a, b in itertools.combinations(frame, 2)]
    mats4 = field_matrix(list(frame) + brackets, pts)
    ranks4, gaps4 = pointwise_rank(mats4, tol)

    bad = (ranks3 != 3) | (ranks4 != 4)
    gaps = np.minimum(gaps3, gaps4)
    return CheckReport(
        name=name,
        passed=not bad.any(),
        n_points=len(pts),
        min_gap=float(gaps.min()),
        failures=_failures(chart, pts, bad, gaps),
        details={
            "route": "span",
            "rank3_gap": float(gaps3.min()),
            "rank4_gap": float(gaps4.min()),
        },
    )


def engel_check(
    pair: Sequence[VectorField],
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    tol: float = DEFAULT_THRESHOLD,
    margin: float = 1e-3,
    name: str = "engel",
) -> CheckReport:
    """Engel condition for a 2-frame: ranks grow 2 -> 3 -> 4 under brackets."""
    if len(pair) != 2:
        raise ValueError("engel_check expects a pair of fields")
    x1, x2 = pair
    chart = x1.chart
    if chart.dim != 4:
        raise ValueError("engel_check expects a 4-dimensional chart")
    pts = _grid(chart, points, min_points, margin)

    x12 = lie_bracket(x1, x2)
    x112 = lie_bracket(x1, x12)
    x212 = lie_bracket(x2, x12)

    ranks2, gaps2 = pointwise_rank(field_matrix([x1, x2], pts), tol)
    ranks3, gaps3 = pointwise_rank(field_matrix([x1, x2, x12], pts), tol)
    ranks4, gaps4 = pointwise_rank(field_matrix([x1, x2, x12, x112, x212], pts), tol)

    bad = (ranks2 != 2) | (ranks3 != 3) | (ranks4 != 4)
    gaps = np.minimum(np.minimum(gaps2, gaps3), gaps4)
    return CheckReport(
        name=name,
        passed=not bad.any(),
        n_points=len(pts),
        min_gap=float(gaps.min()),
        failures=_failures(chart, pts, bad, gaps),
        details={
            "rank2_gap": float(gaps2.min()),
            "rank3_gap": float(gaps3.min()),
            "rank4_gap": float(gaps4.min()),
        },
    )


def isotropic_line_check(
    w: VectorField,
    alpha: OneForm,
    spanning: Sequence[VectorField],
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    tol: float = DEFAULT_TOL,
    threshold: float = DEFAULT_THRESHOLD,
    margin: float = 1e-3,
    name: str = "isotropic_line",
) -> CheckReport:
    """W spans the kernel line of dalpha restricted to ker(alpha).

    Requires alpha(W) = 0, dalpha(W, E_i) = 0 for every spanning field of
    the kernel distribution, and W itself nonvanishing.
    """
    chart = alpha.chart
    pts = _grid(chart, points, min_points, margin)
    omega = exterior_derivative(alpha)

    residual_scalars = [alpha.apply(w)]
    residual_scalars.extend(omega.apply(w, e) for e in spanning)
    residuals = np.abs(batch_eval_scalars(residual_scalars, pts))
    worst_residual = float(residuals.max())

    wmat = field_matrix([w], pts)[:, 0, :]
    norms = np.linalg.norm(wmat, axis=-1)
    bad = (residuals.max(axis=-1) > tol) | (norms <= threshold)
    details = {
        "alpha_w_residual": float(residuals[:, 0].max()),
        "pairing_residual": worst_residual,
    }
    if _all_exact(w.components) and _all_exact(alpha.components):
        exact_zero = isinstance(alpha.apply(w), Expr) and alpha.apply(w).is_zero(tol)
        details["alpha_w_exact_zero"] = bool(exact_zero)
    return CheckReport(
        name=name,
        passed=not bad.any(),
        n_points=len(pts),
        min_gap=float(norms.min()),
        failures=_failures(chart, pts, bad, norms),
        details=details,
    )


# -- contact vector fields ----------------------------------------------------


def _oneform_wedge(beta: OneForm, alpha: OneForm) -> TwoForm:
    chart = beta.chart
    pairs = tuple(itertools.combinations(range(chart.dim), 2))
    comps = []
    for i, j in pairs:
        comps.append(
            scalar_sub(
                scalar_mul(beta.components[i], alpha.components[j]),
                scalar_mul(beta.components[j], alpha.components[i]),
            )
        )
    return TwoForm(chart, pairs, tuple(comps))


def contact_vector_field_check(
    L: VectorField,
    alpha: OneForm,
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    tol: float = DEFAULT_TOL,
    margin: float = 1e-3,
    name: str = "contact_vector_field",
) -> CheckReport:
    """Whether the flow of L preserves ker(alpha).

    The Lie derivative is computed by the Cartan formula and the kernel
    condition is the vanishing of (L_L alpha) ^ alpha.  When every component
    is exact the same wedge is also reduced symbolically, and the two
    verdicts must agree.
    """
    chart = alpha.chart
    pts = _grid(chart, points, min_points, margin)
    lie = lie_derivative_oneform(L, alpha)
    wedge = _oneform_wedge(lie, alpha)
    vals = np.abs(batch_eval_scalars(list(wedge.components), pts))
    residual = vals.max(axis=-1)
    numeric_pass = bool(residual.max() <= tol)
    details: dict = {"route": "cartan+wedge", "max_residual": float(residual.max())}

    passed = numeric_pass
    if _all_exact(lie.components) and _all_exact(alpha.components):
        symbolic_pass = all(c.is_zero(tol) for c in wedge.components)
        details["symbolic_zero"] = bool(symbolic_pass)
        if symbolic_pass != numeric_pass:
            details["routes_disagree"] = True
            passed = False

    bad = residual > tol
    return CheckReport(
        name=name,
        passed=passed,
        n_points=len(pts),
        min_gap=float(residual.max()),
        failures=_failures(chart, pts, bad, residual),
        details=details,
    )


# -- fibrations ---------------------------------------------------------------


def fibration_transversality_check(
    theta: OneForm,
    w: VectorField,
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    tol: float = DEFAULT_TOL,
    threshold: float = DEFAULT_THRESHOLD,
    margin: float = 1e-3,
    name: str = "fibration_transversality",
) -> CheckReport:
    """W is transverse to the fibers of a closed fibration form.

    Requires d(theta) = 0 and theta(W) bounded away from zero with one sign.
    """
    chart = theta.chart
    pts = _grid(chart, points, min_points, margin)

    dtheta = exterior_derivative(theta)
    closed_residual = float(np.abs(batch_eval_scalars(list(dtheta.components), pts)).max())

    pairing = batch_eval_scalars([theta.apply(w)], pts)[:, 0]
    margins = np.abs(pairing)
    same_sign = bool((pairing > 0).all() or (pairing < 0).all())
    bad = margins <= threshold
    passed = closed_residual <= tol and same_sign and not bad.any()
    return CheckReport(
        name=name,
        passed=passed,
        n_points=len(pts),
        min_gap=float(margins.min()),
        failures=_failures(chart, pts, bad, pairing),
        details={
            "closed_residual": closed_residual,
            "sign": "positive" if pairing.max() > 0 else "negative",
            "constant_sign": same_sign,
        },
    )


# -- aggregation over families -------------------------------------------------


def family_slice_check(
    name: str,
    slice_report: Callable[[float], CheckReport],
    s_values: Sequence[float],
) -> CheckReport:
    """Run a per-slice check across a parameter family and aggregate."""
    reports = [(float(s), slice_report(float(s))) for s in s_values]
    passed = all(r.passed for _, r in reports)
    min_gap = min((r.min_gap for _, r in reports), default=0.0)
    failures = tuple(
        {"s": s, "check": r.name, "value": r.min_gap} for s, r in reports if not r.passed
    )[:MAX_FAILURES]
    return CheckReport(
        name=name,
        passed=passed,
        n_points=sum(r.n_points for _, r in reports),
        min_gap=float(min_gap),
        failures=failures,
        details={"slices": len(reports)},
    )


# -- adaptedness ---------------------------------------------------------------


def adaptedness_check(
    piece,
    points: np.ndarray | None = None,
    min_points: int = DEFAULT_MIN_POINTS,
    tol: float = DEFAULT_TOL,
    margin: float = 1e-3,
) -> CheckReport:
    """Dispatch the role-appropriate adaptedness certificate for a piece.

    A piece is duck-typed by its ``role`` attribute:

    - ``"page"``: the kernel line must be transverse to the declared
      fibration form (``piece.fibration_form``, ``piece.w_field``).
    - ``"collar"``: the kernel line must be tangent to the boundary tori
      (``piece.torus_normal`` pairs to zero) and nonvanishing, and each
      declared torus slope must match the computed one.
    - ``"binding"``: the kernel line must be tangent to the binding locus
      (transverse components vanish on ``piece.binding_locus``) and
      nonvanishing there.
    """
    role = getattr(piece, "role")
    if role == "page":
        return fibration_transversality_check(
            piece.fibration_form,
            piece.w_field,
            points=points,
            min_points=min_points,
            tol=tol,
            margin=margin,
            name="adapted_page",
        )
    if role == "collar":
        return _adapted_collar(piece, points, min_points, tol, margin)
    if role == "binding":
        return _adapted_binding(piece, points, min_points, tol, margin)
    raise ValueError(f"unknown piece role {role!r}")


def _adapted_collar(piece, points, min_points, tol, margin) -> CheckReport:
    from .foliation import torus_slope

    chart = piece.chart
    pts = _grid(chart, points, min_points, margin)
    w = piece.w_field

    # tangency to the tori: the normal coordinate component of W vanishes
    normal = piece.torus_normal.apply(w)
    residual = float(np.abs(batch_eval_scalars([normal], pts)).max())

    wmat = field_matrix([w], pts)[:, 0, :]
    norms = np.linalg.norm(wmat, axis=-1)

    slope_errors = []
    for torus in piece.boundary_tori:
        computed = torus_slope(torus.pullback())
        slope_errors.append(abs(computed - torus.declared_slope))
    slope_residual = max(slope_errors) if slope_errors else 0.0

    passed = residual <= tol and slope_residual <= max(tol, 1e-9) and norms.min() > 0
    bad = norms <= 0
    return CheckReport(
        name="adapted_collar",
        passed=passed,
        n_points=len(pts),
        min_gap=float(norms.min()),
        failures=_failures(chart, pts, bad, norms),
        details={
            "tangency_residual": residual,
            "slope_residual": float(slope_residual),
            "tori": len(piece.boundary_tori),
        },
    )


def _adapted_binding(piece, points, min_points, tol, margin) -> CheckReport:
    chart = piece.chart
    locus: dict[str, float] = dict(piece.binding_locus)
    w = piece.w_field

    # restrict W to the binding locus and drop the transverse directions
    transverse = [chart.index(nm) for nm in locus]
    restricted = []
    for i, comp in enumerate(w.components):
        if not isinstance(comp, Expr):
            raise ValueError("binding adaptedness needs exact components")
        restricted.append(comp.substitute_constants(locus))

    sub_coords = restricted[0].coords
    sub_names = [c.name for c in sub_coords]
    # sample the binding locus itself
    sub_chart_axes = []
    for c, b in zip(chart.coords, chart.bounds):
        if c.name in sub_names:
            sub_chart_axes.append((c, b))
    n = max(2, int(round(min_points ** (1.0 / max(len(sub_chart_axes), 1)))))
    axes = []
    for c, b in sub_chart_axes:
        if c.is_angular:
            axes.append(np.linspace(b.lo, b.hi, n, endpoint=False))
        else:
            lo, hi = b.sample_range(margin)
            axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)

    vals = np.stack([r.compile()(pts) for r in restricted], axis=-1)
    trans_vals = vals[:, transverse]
    residual = float(np.abs(trans_vals).max()) if transverse else 0.0
    tangent_idx = [i for i in range(chart.dim) if i not in transverse]
    norms = np.linalg.norm(vals[:, tangent_idx], axis=-1)

    passed = residual <= tol and bool((norms > 0).all())
    bad = norms <= 0
    failures = tuple(
        {"point": {nm: float(pts[i, k]) for k, nm in enumerate(sub_names)}, "value": float(norms[i])}
        for i in np.nonzero(bad)[0][:MAX_FAILURES]
    )
    return CheckReport(
        name="adapted_binding",
        passed=passed,
        n_points=len(pts),
        min_gap=float(norms.min()),
        failures=failures,
        details={"tangency_residual": residual, "locus": {k: float(v) for k, v in sorted(locus.items())}},
    )
