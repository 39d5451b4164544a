"""Phase-portrait export: quiver SVG plus the raw grid as CSV.

Output is byte-deterministic: coordinates are written with fixed precision and
nothing depends on dict ordering, time, or locale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .dynamics import (GridSpec, LinearSystem2x2, equilibrium_point, integrate_trajectory,
                       vector_field)
from .errors import DomainError, SingularSystemError

WIDTH = HEIGHT = 640
MARGIN = 56
CSV_HEADER = "x,y,dx,dy"


@dataclass(frozen=True)
class CobbDouglasLevels:
    """Output isoquants ``tfp * x**alpha * y**(1 - alpha) = level`` drawn over the grid."""

    tfp: float
    alpha: float
    levels: tuple[float, ...]

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise DomainError("isoquants need 0 <= alpha < 1 so that y can be solved for")
        if self.tfp <= 0 or any(lv <= 0 for lv in self.levels):
            raise DomainError("tfp and isoquant levels must be positive")


@dataclass(frozen=True)
class PortraitDocument:
    svg: str
    csv: str


def _num(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


class _Frame:
    def __init__(self, grid: GridSpec):
        self.x0, self.x1 = grid.x_range
        self.y0, self.y1 = grid.y_range
        self.w = WIDTH - 2 * MARGIN
        self.h = HEIGHT - 2 * MARGIN

    def px(self, x: float, y: float) -> tuple[float, float]:
        u = MARGIN + (x - self.x0) / (self.x1 - self.x0) * self.w
        v = MARGIN + (self.y1 - y) / (self.y1 - self.y0) * self.h
        return u, v


def grid_csv(field) -> str:
    lines = [CSV_HEADER]
    for x, y, dx, dy in field.arrows:
        lines.append(",".join(repr(float(v)) for v in (x, y, dx, dy)))
    return "\n".join(lines) + "\n"


def _arrow_lines(field, frame: _Frame) -> list[str]:
    g = field.grid
    cell = min(frame.w / (g.nx - 1), frame.h / (g.ny - 1))
    # velocities converted to pixel units before normalising, so arrows follow screen direction
    sx = frame.w / (frame.x1 - frame.x0)
    sy = frame.h / (frame.y1 - frame.y0)
    vpx = np.column_stack([field.arrows[:, 2] * sx, -field.arrows[:, 3] * sy])
    norms = np.hypot(vpx[:, 0], vpx[:, 1])
    longest = float(norms.max()) if len(norms) else 0.0
    out = []
    if longest == 0.0:
        return out
    k = 0.85 * cell / longest
    for (x, y, _, _), (du, dv), n in zip(field.arrows, vpx, norms):
        if n * k < 1e-6:
            continue
        u, v = frame.px(x, y)
        out.append(f'<line x1="{_num(u)}" y1="{_num(v)}" x2="{_num(u + du * k)}" '
                   f'y2="{_num(v + dv * k)}" class="arrow" marker-end="url(#head)"/>')
    return out


def _isoquant_lines(levels: CobbDouglasLevels, frame: _Frame) -> list[str]:
    out = []
    omega = 1.0 - levels.alpha
    lo = max(frame.x0, 1e-9 * max(1.0, abs(frame.x1)))
    if lo >= frame.x1:
        return out
    xs = np.linspace(lo, frame.x1, 121)
    for level in levels.levels:
        ys = (level / (levels.tfp * xs ** levels.alpha)) ** (1.0 / omega)
        pts = " ".join(f"{_num(u)},{_num(v)}" for u, v in (frame.px(x, y) for x, y in zip(xs, ys))
                       if math.isfinite(v))
        out.append(f'<polyline points="{pts}" class="isoquant"/>')
    return out


def render_svg(sys: LinearSystem2x2, grid: GridSpec, sample_starts: Sequence = (),
               t_end: float = 20.0, dt: float = 0.01,
               levels: CobbDouglasLevels | None = None, title: str = "phase portrait") -> str:
    field = vector_field(sys, grid)
    frame = _Frame(grid)
    parts = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(title)}</title>",
        "<defs>",
        '<marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" '
        'orient="auto" markerUnits="strokeWidth"><path d="M0,0 L6,3 L0,6 z" fill="#335"/></marker>',
        f'<clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{frame.w}" '
        f'height="{frame.h}"/></clipPath>',
        "</defs>",
        "<style>.arrow{stroke:#335;stroke-width:1}"
        ".traj{fill:none;stroke:#c33;stroke-width:1.5}"
        ".isoquant{fill:none;stroke:#393;stroke-width:1;stroke-dasharray:4 3}"
        ".axis{fill:none;stroke:#000;stroke-width:1}"
        "text{font-family:sans-serif;font-size:11px}</style>",
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{frame.w}" height="{frame.h}" class="axis"/>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}">{_num(frame.x0)}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="end">'
        f"{_num(frame.x1)}</text>",
        f'<text x="{MARGIN - 6}" y="{HEIGHT - MARGIN}" text-anchor="end">{_num(frame.y0)}</text>',
        f'<text x="{MARGIN - 6}" y="{MARGIN + 4}" text-anchor="end">{_num(frame.y1)}</text>',
        f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 16}" text-anchor="middle">x (endowment)</text>',
        f'<text x="16" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {HEIGHT / 2:.0f})">y (growth)</text>',
        '<g clip-path="url(#plot)">',
    ]
    parts += _arrow_lines(field, frame)
    if levels is not None:
        parts += _isoquant_lines(levels, frame)
    for start in sample_starts:
        traj = integrate_trajectory(sys, start, t_end=t_end, dt=dt)
        pts = " ".join(f"{_num(u)},{_num(v)}" for u, v in (frame.px(x, y) for x, y in traj.states))
        parts.append(f'<polyline points="{pts}" class="traj"/>')
    try:
        eq = equilibrium_point(sys)
    except SingularSystemError:
        eq = None
    if eq is not None:
        u, v = frame.px(*eq)
        parts.append(f'<circle cx="{_num(u)}" cy="{_num(v)}" r="4" fill="#000" '
                     'class="equilibrium"/>')
    parts += ["</g>", "</svg>"]
    return "\n".join(parts) + "\n"


def phase_portrait_export(sys: LinearSystem2x2, grid: GridSpec, sample_starts: Sequence = (),
                          svg_path: str | Path | None = None, csv_path: str | Path | None = None,
                          **svg_options) -> PortraitDocument:
    """Render the portrait, optionally writing SVG and CSV to disk.

    Write errors propagate unchanged.
    """
    doc = PortraitDocument(render_svg(sys, grid, sample_starts, **svg_options),
                           grid_csv(vector_field(sys, grid)))
    if svg_path is not None:
        Path(svg_path).write_text(doc.svg, encoding="utf-8", newline="\n")
    if csv_path is not None:
        Path(csv_path).write_text(doc.csv, encoding="utf-8", newline="\n")
    return doc
