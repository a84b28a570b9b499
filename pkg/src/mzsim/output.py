"""Deterministic CSV and SVG emitters for result tables and figures.

A table is an ordered mapping from column name to an equal-length sequence.
Complex columns are written as two columns ``<name>.re`` and ``<name>.im``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .qlinalg import ShapeError

Table = Mapping[str, Sequence]


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _expand(table: Table) -> tuple[list[str], list[list]]:
    names, cols = [], []
    for name, col in table.items():
        vals = list(col)
        if any(isinstance(v, (complex, np.complexfloating)) for v in vals):
            names += [f"{name}.re", f"{name}.im"]
            cols += [[complex(v).real for v in vals], [complex(v).imag for v in vals]]
        else:
            names.append(name)
            cols.append(vals)
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ShapeError(f"ragged table: column lengths {sorted(lengths)}")
    return names, cols


def emit_csv(table: Table) -> bytes:
    """Header row plus one row per entry; RFC 4180 quoting with LF line ends."""
    names, cols = _expand(table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(names)
    for row in zip(*cols):
        w.writerow([_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def read_csv(data: bytes) -> dict[str, list]:
    """Parse :func:`emit_csv` output; numeric cells become floats."""
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    if not rows:
        return {}
    out: dict[str, list] = {h: [] for h in rows[0]}
    for row in rows[1:]:
        for h, v in zip(rows[0], row):
            try:
                out[h].append(float(v))
            except ValueError:
                out[h].append(v)
    return out


def emit_json_table(table: Table) -> dict:
    names, cols = _expand(table)
    return {n: [float(v) if isinstance(v, (float, np.floating)) else (int(v) if isinstance(v, (int, np.integer)) else v) for v in c] for n, c in zip(names, cols)}


# ---- SVG -----------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
_CMAP = ((0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)), (0.75, (94, 201, 98)), (1.0, (253, 231, 37)))
W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 72, 150, 40, 56


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]


@dataclass
class LinePlot:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)


@dataclass
class HeatMap:
    """``z[i, j]`` is drawn at column ``x[j]`` and row label ``rows[i]``."""

    title: str
    xlabel: str
    ylabel: str
    x: Sequence[float]
    rows: Sequence[str]
    z: np.ndarray
    zlabel: str = ""


def _f(v: float) -> str:
    return format(round(v, 2), ".2f")


def _num(v: float) -> str:
    if v == 0:
        return "0"
    return format(v, ".4g")


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks, t = [], start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _range(values) -> tuple[float, float]:
    v = np.asarray([x for x in values if math.isfinite(x)], dtype=float)
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]


def _axes(parts, xlo, xhi, ylo, yhi, xlabel, ylabel, px, py, yticks=True):
    x0, x1, y0, y1 = LEFT, W - RIGHT, H - BOTTOM, TOP
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')
    for t in nice_ticks(xlo, xhi):
        X = px(t)
        parts.append(f'<line x1="{_f(X)}" y1="{y0}" x2="{_f(X)}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{_f(X)}" y="{y0 + 18}" text-anchor="middle">{_num(t)}</text>')
    if yticks:
        for t in nice_ticks(ylo, yhi):
            Y = py(t)
            parts.append(f'<line x1="{x0 - 5}" y1="{_f(Y)}" x2="{x0}" y2="{_f(Y)}" stroke="black"/>')
            parts.append(f'<text x="{x0 - 8}" y="{_f(Y + 4)}" text-anchor="end">{_num(t)}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{H - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" transform="rotate(-90 18 {(y0 + y1) / 2:.0f})">{escape(ylabel)}</text>')


def _line_svg(fig: LinePlot) -> str:
    xs = [v for s in fig.series for v in s.x]
    ys = [v for s in fig.series for v in s.y]
    xlo, xhi = _range(xs)
    ylo, yhi = _range(ys)
    px = lambda v: LEFT + (v - xlo) / (xhi - xlo) * (W - RIGHT - LEFT)  # noqa: E731
    py = lambda v: (H - BOTTOM) - (v - ylo) / (yhi - ylo) * (H - BOTTOM - TOP)  # noqa: E731
    parts = _header(fig.title)
    _axes(parts, xlo, xhi, ylo, yhi, fig.xlabel, fig.ylabel, px, py)
    for k, s in enumerate(fig.series):
        if len(s.x) != len(s.y):
            raise ShapeError(f"series {s.label!r} has mismatched x and y")
        color = PALETTE[k % len(PALETTE)]
        pts = [(px(a), py(b)) for a, b in zip(s.x, s.y) if math.isfinite(a) and math.isfinite(b)]
        if len(pts) > 1:
            coords = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if len(pts) <= 40:
            parts += [f'<circle cx="{_f(a)}" cy="{_f(b)}" r="3" fill="{color}"/>' for a, b in pts]
        ly = TOP + 14 + 18 * k
        parts.append(f'<line x1="{W - RIGHT + 12}" y1="{ly}" x2="{W - RIGHT + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{W - RIGHT + 38}" y="{ly + 4}">{escape(s.label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def colormap(u: float) -> str:
    u = min(max(u, 0.0), 1.0)
    for (a, ca), (b, cb) in zip(_CMAP, _CMAP[1:]):
        if u <= b:
            w = (u - a) / (b - a)
            rgb = [round(x + (y - x) * w) for x, y in zip(ca, cb)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*_CMAP[-1][1])


def _heat_svg(fig: HeatMap) -> str:
    z = np.asarray(fig.z, dtype=float)
    x = np.asarray(fig.x, dtype=float)
    if z.shape != (len(fig.rows), len(x)):
        raise ShapeError(f"heat map data {z.shape} does not match {len(fig.rows)} rows x {len(x)} columns")
    xlo, xhi = _range(x)
    zlo, zhi = _range(z.ravel())
    if np.all(z == z.flat[0]):
        zlo, zhi = min(zlo, float(z.flat[0])), max(zhi, float(z.flat[0]))
    nrow = len(fig.rows)
    x0, x1, y0, y1 = LEFT, W - RIGHT, H - BOTTOM, TOP
    px = lambda v: x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)  # noqa: E731
    edges = np.concatenate([[x[0]], 0.5 * (x[1:] + x[:-1]), [x[-1]]]) if len(x) > 1 else np.array([xlo, xhi])
    rh = (y0 - y1) / nrow
    parts = _header(fig.title)
    for i in range(nrow):
        top = y1 + i * rh
        for j in range(len(x)):
            a, b = px(edges[j]), px(edges[j + 1])
            c = colormap((z[i, j] - zlo) / (zhi - zlo))
            parts.append(f'<rect x="{_f(a)}" y="{_f(top)}" width="{_f(max(b - a, 0.5))}" height="{_f(rh)}" fill="{c}"/>')
        parts.append(f'<text x="{x0 - 8}" y="{_f(top + rh / 2 + 4)}" text-anchor="end">{escape(str(fig.rows[i]))}</text>')
    _axes(parts, xlo, xhi, 0, 1, fig.xlabel, fig.ylabel, px, None, yticks=False)
    cx, steps = W - RIGHT + 20, 50
    for k in range(steps):
        yy = y0 - (k + 1) * (y0 - y1) / steps
        parts.append(f'<rect x="{cx}" y="{_f(yy)}" width="16" height="{_f((y0 - y1) / steps + 0.5)}" fill="{colormap((k + 0.5) / steps)}"/>')
    for t in nice_ticks(zlo, zhi, 4):
        yy = y0 - (t - zlo) / (zhi - zlo) * (y0 - y1)
        parts.append(f'<text x="{cx + 22}" y="{_f(yy + 4)}">{_num(t)}</text>')
    parts.append(f'<text x="{cx}" y="{y1 - 8}">{escape(fig.zlabel)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg(fig: LinePlot | HeatMap) -> bytes:
    """Self-contained static SVG (no scripts, fonts or external links)."""
    if isinstance(fig, LinePlot):
        return _line_svg(fig).encode("utf-8")
    if isinstance(fig, HeatMap):
        return _heat_svg(fig).encode("utf-8")
    raise TypeError(f"unsupported figure type {type(fig).__name__}")

