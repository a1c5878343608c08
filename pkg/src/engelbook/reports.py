"""Reproducible report documents: JSON, CSV portraits, SVG sketches.

Every document embeds the tool version, the full configuration (including
the random seed and tolerance settings), and the orientation conventions,
so that two runs with the same configuration produce byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .foliation import DiskContactForm
from .models import PipelineReport
from .verify import CheckReport

__all__ = [
    "CONVENTIONS",
    "TOLERANCE_DEFAULTS",
    "construct_document",
    "json_document",
    "portrait_rows",
    "render_csv",
    "render_json",
    "render_svg",
]

TOLERANCE_DEFAULTS = {
    "rank": 1e-9,
    "zero": 1e-12,
    "slope": 1e-9,
    "residual": 0.25,
}

CONVENTIONS = {
    "orientation": "coordinate order as listed on each chart, right-handed",
    "twist_sign": "counterclockwise rotation against the frame counts +1",
    "angle_period": 2.0 * math.pi,
}


def _check_entry(report: CheckReport) -> dict:
    entry = report.to_dict()
    entry["pass"] = bool(entry["pass"])
    return entry


def json_document(
    config: dict,
    checks: Sequence[CheckReport],
    invariants: dict | None = None,
    singularities: dict | None = None,
    overall_pass: bool | None = None,
) -> dict:
    """Assemble the full report schema from its parts."""
    sing = dict(singularities or {})
    if "euler_identity" in sing:
        sing["euler_identity"] = bool(sing["euler_identity"])
    if overall_pass is None:
        overall_pass = all(c.passed for c in checks)
    return {
        "tool_version": __version__,
        "config": dict(config),
        "conventions": dict(CONVENTIONS),
        "checks": [_check_entry(c) for c in checks],
        "invariants": dict(invariants or {}),
        "singularities": sing,
        "overall_pass": bool(overall_pass),
    }


def construct_document(report: PipelineReport, config: dict) -> dict:
    merged = dict(config)
    merged.update(report.params)
    return json_document(
        merged,
        report.checks,
        invariants=report.invariants,
        singularities=report.singularities,
        overall_pass=report.overall_pass,
    )


def render_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


# -- foliation portraits -------------------------------------------------------


def portrait_rows(disk: DiskContactForm, grid_n: int = 41) -> list[tuple]:
    """Sampled direction field of the page foliation on the unit disk.

    Rows are (u, v, direction_u, direction_v, singular_flag) in row-major
    order; directions are unit vectors, zero where the field vanishes.
    """
    axis = np.linspace(-0.98, 0.98, grid_n)
    P, Q = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([P.reshape(-1), Q.reshape(-1)], axis=-1)
    pts = pts[np.linalg.norm(pts, axis=-1) <= 0.98]
    vec = disk.classifier.value(pts)
    norm = np.linalg.norm(vec, axis=-1)
    singular = norm < 1e-8
    safe = np.maximum(norm, 1e-30)
    unit = vec / safe[:, None]
    unit[singular] = 0.0
    rows = []
    for (u, v), (du, dv), flag in zip(pts, unit, singular):
        rows.append(
            (
                round(float(u), 12),
                round(float(v), 12),
                round(float(du), 12),
                round(float(dv), 12),
                int(flag),
            )
        )
    return rows


def render_csv(rows: Iterable[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["u", "v", "direction_u", "direction_v", "singular_flag"])
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def render_svg(disk: DiskContactForm, grid_n: int = 25) -> str:
    """Self-contained portrait sketch: direction ticks plus marked zeros."""
    size = 640.0
    scale = size / 2.2

    def sx(u: float) -> float:
        return size / 2.0 + scale * u

    def sy(v: float) -> float:
        return size / 2.0 - scale * v

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" '
        f'height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>',
        f'<circle cx="{size / 2:.1f}" cy="{size / 2:.1f}" r="{scale:.1f}" '
        'fill="none" stroke="black" stroke-width="1.5"/>',
    ]
    half = 0.45 * (1.96 / max(grid_n - 1, 1))
    for u, v, du, dv, flag in portrait_rows(disk, grid_n):
        if flag:
            continue
        x0, y0 = sx(u - half * du), sy(v - half * dv)
        x1, y1 = sx(u + half * du), sy(v + half * dv)
        lines.append(
            f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" '
            'stroke="#3060c0" stroke-width="1"/>'
        )
    for zero in disk.singularities.zeros:
        color = "#c03030" if zero["type"] == "hyperbolic" else "#208040"
        lines.append(
            f'<circle cx="{sx(zero["p"]):.2f}" cy="{sy(zero["q"]):.2f}" r="5" '
            f'fill="{color}" stroke="black" stroke-width="1"/>'
        )
    lines.append(
        f'<text x="10" y="{size - 12:.0f}" font-family="monospace" font-size="14">'
        f"k = {disk.k}, zeros = {len(disk.singularities.zeros)}</text>"
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
