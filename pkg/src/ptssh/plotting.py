"""Self-contained SVG line plots and heatmaps (no plotting library needed)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptySeries

PALETTE = ("#6a3d9a", "#e31a1c", "#1f78b4", "#33a02c", "#ff7f00", "#b15928", "#a6cee3", "#fb9a99")
# Perceptually ordered ramp (dark blue -> yellow), interpolated linearly.
RAMP = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))
MISSING_COLOR = "#bdbdbd"

PANEL_W, PANEL_H = 420, 300
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 36, 52


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    color: str | None = None
    dashed: bool = False


@dataclass
class Panel:
    series: list[Series]
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    vlines: list[float] = field(default_factory=list)


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    span = hi - lo
    raw = span / max(target, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


def data_range(values: np.ndarray) -> tuple[float, float]:
    """Finite min/max, padded by 0.1 when the range is degenerate."""
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return -0.1, 0.1
    lo, hi = float(finite.min()), float(finite.max())
    if hi - lo < 1e-12:
        return lo - 0.1, hi + 0.1
    return lo, hi


class _Canvas:
    def __init__(self, width: int, height: int, title: str = ""):
        self.width, self.height = width, height
        self.parts: list[str] = []
        if title:
            self.text(width / 2, 18, title, size=14, anchor="middle")

    def text(self, x, y, s, size=11, anchor="start", rotate=None):
        rot = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' if rotate is not None else ""
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" text-anchor="{anchor}"{rot}>{escape(s)}</text>'
        )

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{width}"{d}/>'
        )

    def rect(self, x, y, w, h, fill, stroke="none"):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="{fill}" stroke="{stroke}"/>'
        )

    def polyline(self, pts, stroke, dashed=False):
        if len(pts) < 2:
            return
        d = ' stroke-dasharray="6 3"' if dashed else ""
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="1.5"{d}/>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif">'
        )
        return "\n".join([head, f'<rect width="{self.width}" height="{self.height}" fill="#fff"/>', *self.parts, "</svg>\n"])


class _Axes:
    def __init__(self, canvas: _Canvas, ox: float, oy: float, xr, yr):
        self.c = canvas
        self.x0, self.y0 = ox + MARGIN_L, oy + MARGIN_T
        self.w = PANEL_W - MARGIN_L - MARGIN_R
        self.h = PANEL_H - MARGIN_T - MARGIN_B
        self.xr, self.yr = xr, yr

    def X(self, v):
        return self.x0 + (v - self.xr[0]) / (self.xr[1] - self.xr[0]) * self.w

    def Y(self, v):
        return self.y0 + self.h - (v - self.yr[0]) / (self.yr[1] - self.yr[0]) * self.h

    def frame(self, xlabel, ylabel, title):
        c = self.c
        c.rect(self.x0, self.y0, self.w, self.h, fill="none", stroke="#000")
        for t in nice_ticks(*self.xr):
            c.line(self.X(t), self.y0 + self.h, self.X(t), self.y0 + self.h + 4)
            c.text(self.X(t), self.y0 + self.h + 16, _tick_label(t), size=10, anchor="middle")
        for t in nice_ticks(*self.yr):
            c.line(self.x0 - 4, self.Y(t), self.x0, self.Y(t))
            c.text(self.x0 - 6, self.Y(t) + 3, _tick_label(t), size=10, anchor="end")
        c.text(self.x0 + self.w / 2, self.y0 + self.h + 36, xlabel, size=12, anchor="middle")
        c.text(self.x0 - 50, self.y0 + self.h / 2, ylabel, size=12, anchor="middle", rotate=-90)
        if title:
            c.text(self.x0 + self.w / 2, self.y0 - 8, title, size=12, anchor="middle")


def _segments(x: np.ndarray, y: np.ndarray):
    """Split a curve at non-finite points."""
    seg = []
    for a, b in zip(x, y):
        if math.isfinite(a) and math.isfinite(b):
            seg.append((a, b))
        elif seg:
            yield seg
            seg = []
    if seg:
        yield seg


def render_panels(panels: Panel | Sequence[Panel], title: str = "", columns: int | None = None) -> str:
    panels = [panels] if isinstance(panels, Panel) else list(panels)
    if not panels or not any(s for p in panels for s in p.series):
        raise EmptySeries("nothing to plot")
    cols = columns or len(panels)
    rows = math.ceil(len(panels) / cols)
    top = 24 if title else 0
    canvas = _Canvas(cols * PANEL_W, rows * PANEL_H + top, title)
    for k, panel in enumerate(panels):
        xs = np.concatenate([np.asarray(s.x, dtype=float) for s in panel.series] or [np.zeros(0)])
        ys = np.concatenate([np.asarray(s.y, dtype=float) for s in panel.series] or [np.zeros(0)])
        y_lo, y_hi = data_range(ys)
        pad = 0.04 * (y_hi - y_lo)
        ax = _Axes(canvas, (k % cols) * PANEL_W, top + (k // cols) * PANEL_H, data_range(xs), (y_lo - pad, y_hi + pad))
        ax.frame(panel.xlabel, panel.ylabel, panel.title)
        for v in panel.vlines:
            if ax.xr[0] <= v <= ax.xr[1]:
                canvas.line(ax.X(v), ax.y0, ax.X(v), ax.y0 + ax.h, stroke="#555", dash="4 3")
        legend_y = ax.y0 + 12
        for i, s in enumerate(panel.series):
            color = s.color or PALETTE[i % len(PALETTE)]
            x, y = np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)
            for seg in _segments(x, y):
                pts = [(ax.X(a), ax.Y(b)) for a, b in seg]
                if len(pts) == 1:
                    canvas.parts.append(f'<circle cx="{_fmt(pts[0][0])}" cy="{_fmt(pts[0][1])}" r="2" fill="{color}"/>')
                canvas.polyline(pts, color, s.dashed)
            if s.label:
                canvas.line(ax.x0 + ax.w - 90, legend_y - 4, ax.x0 + ax.w - 72, legend_y - 4, stroke=color, width=2,
                            dash="6 3" if s.dashed else None)
                canvas.text(ax.x0 + ax.w - 68, legend_y, s.label, size=10)
                legend_y += 13
    return canvas.render()


def emit_svg(path, panels: Panel | Sequence[Panel], title: str = "", columns: int | None = None) -> Path:
    """Write a line-plot SVG (one or more panels) to ``path``."""
    out = Path(path)
    out.write_text(render_panels(panels, title, columns), encoding="utf-8")
    return out


def ramp_color(u: float) -> str:
    if not math.isfinite(u):
        return MISSING_COLOR
    u = min(max(u, 0.0), 1.0) * (len(RAMP) - 1)
    i = min(int(u), len(RAMP) - 2)
    f = u - i
    rgb = [round(a + (b - a) * f) for a, b in zip(RAMP[i], RAMP[i + 1])]
    return "#%02x%02x%02x" % tuple(rgb)


def render_heatmap(
    x: Sequence[float],
    y: Sequence[float],
    z,
    *,
    xlabel: str,
    ylabel: str,
    title: str = "",
    overlays: Sequence[Series] = (),
    categories: dict[str, str] | None = None,
) -> str:
    """Heatmap with ``z[i][j]`` at ``(x[i], y[j])``.

    ``z`` is numeric (non-finite cells drawn grey) or, with ``categories``
    mapping value -> color, categorical.
    """
    xs, ys = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise EmptySeries("empty heatmap grid")
    canvas = _Canvas(PANEL_W + (190 if categories else 110), PANEL_H)
    ax = _Axes(canvas, 0, 0, data_range(xs), data_range(ys))

    def edges(v):
        if v.size == 1:
            return np.array([v[0] - 0.5, v[0] + 0.5])
        mid = (v[1:] + v[:-1]) / 2
        return np.concatenate([[v[0] - (mid[0] - v[0])], mid, [v[-1] + (v[-1] - mid[-1])]])

    ex, ey = edges(xs), edges(ys)
    ax.xr, ax.yr = (float(ex[0]), float(ex[-1])), (float(ey[0]), float(ey[-1]))
    if categories is None:
        zz = np.asarray(z, dtype=float)
        lo, hi = data_range(zz)
        color_of = lambda v: ramp_color((v - lo) / (hi - lo))  # noqa: E731
    else:
        color_of = lambda v: categories.get(v, MISSING_COLOR)  # noqa: E731
        zz = z
    for i in range(xs.size):
        for j in range(ys.size):
            x0, x1 = ax.X(ex[i]), ax.X(ex[i + 1])
            y0, y1 = ax.Y(ey[j + 1]), ax.Y(ey[j])
            canvas.rect(x0, y0, x1 - x0 + 0.6, y1 - y0 + 0.6, fill=color_of(zz[i][j]))
    for k, s in enumerate(overlays):
        color = s.color or "#ffffff"
        for seg in _segments(np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)):
            pts = [(ax.X(a), ax.Y(min(max(b, ax.yr[0]), ax.yr[1]))) for a, b in seg]
            canvas.polyline(pts, color, s.dashed)
    ax.frame(xlabel, ylabel, title)
    lx = PANEL_W + 5
    if categories is None:
        for k in range(5):
            u = k / 4
            canvas.rect(lx, MARGIN_T + 10 + (4 - k) * 20, 14, 20, fill=ramp_color(u))
            canvas.text(lx + 18, MARGIN_T + 24 + (4 - k) * 20, _tick_label(lo + u * (hi - lo)), size=10)
        canvas.rect(lx, MARGIN_T + 120, 14, 14, fill=MISSING_COLOR)
        canvas.text(lx + 18, MARGIN_T + 131, "inf / n.a.", size=10)
    else:
        for k, (name, col) in enumerate(categories.items()):
            canvas.rect(lx, MARGIN_T + 10 + 18 * k, 14, 14, fill=col)
            canvas.text(lx + 18, MARGIN_T + 21 + 18 * k, name, size=9)
    return canvas.render()


def emit_heatmap(path, x, y, z, **kwargs) -> Path:
    out = Path(path)
    out.write_text(render_heatmap(x, y, z, **kwargs), encoding="utf-8")
    return out
