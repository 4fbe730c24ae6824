"""Minimal SVG line charts: stacked panels, optional log axes, one polyline per series."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

_COLORS = ("#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")

PANEL_W, PANEL_H = 560, 260
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 30, 45


@dataclass
class Series:
    label: str
    x: list
    y: list


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    log_x: bool = False
    log_y: bool = False
    series: list[Series] = field(default_factory=list)


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-2:
        return f"{v:.0e}"
    return f"{v:g}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
        step = max(1, (b - a) // 6)
        return [10.0**k for k in range(a, b + 1, step)]
    if hi == lo:
        return [lo]
    raw = (hi - lo) / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _points(s: Series, log_x: bool, log_y: bool) -> list[tuple[float, float]]:
    pts = []
    for x, y in zip(s.x, s.y):
        if (log_x and x <= 0) or (log_y and y <= 0):
            continue  # not representable on a log axis
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        pts.append((float(x), float(y)))
    return pts


def _panel(p: Panel, top: float) -> list[str]:
    out = []
    data = [_points(s, p.log_x, p.log_y) for s in p.series]
    xs = [x for pts in data for x, _ in pts]
    ys = [y for pts in data for _, y in pts]
    x0, y0 = MARGIN_L, top + MARGIN_T
    w, h = PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B
    out.append(f'<text x="{x0 + w / 2}" y="{top + 18}" text-anchor="middle" font-size="14">{escape(p.title)}</text>')
    out.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#333"/>')
    if not xs:
        return out
    tx = (lambda v: math.log10(v)) if p.log_x else float
    ty = (lambda v: math.log10(v)) if p.log_y else float
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if p.log_y and ylo == yhi:
        ylo, yhi = ylo / 2, yhi * 2
    elif ylo == yhi:
        ylo, yhi = ylo - 1, yhi + 1
    if xlo == xhi:
        xlo, xhi = (xlo / 2, xhi * 2) if p.log_x else (xlo - 1, xhi + 1)
    xticks, yticks = _ticks(xlo, xhi, p.log_x), _ticks(ylo, yhi, p.log_y)
    # widen the range to the outer ticks on log axes
    if p.log_y:
        ylo, yhi = min(ylo, yticks[0]), max(yhi, yticks[-1])
    if p.log_x:
        xlo, xhi = min(xlo, xticks[0]), max(xhi, xticks[-1])
    ax, bx = tx(xlo), tx(xhi)
    ay, by = ty(ylo), ty(yhi)

    def px(v):
        return x0 + (tx(v) - ax) / (bx - ax) * w

    def py(v):
        return y0 + h - (ty(v) - ay) / (by - ay) * h

    for t in xticks:
        if xlo <= t <= xhi:
            out.append(f'<line x1="{px(t):.1f}" y1="{y0 + h}" x2="{px(t):.1f}" y2="{y0 + h + 5}" stroke="#333"/>')
            out.append(f'<text x="{px(t):.1f}" y="{y0 + h + 18}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
    for t in yticks:
        if ylo <= t <= yhi:
            out.append(f'<line x1="{x0 - 5}" y1="{py(t):.1f}" x2="{x0}" y2="{py(t):.1f}" stroke="#333"/>')
            out.append(f'<text x="{x0 - 8}" y="{py(t) + 4:.1f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
    out.append(f'<text x="{x0 + w / 2}" y="{y0 + h + 36}" text-anchor="middle" font-size="12">{escape(p.xlabel)}</text>')
    out.append(
        f'<text x="{x0 - 55}" y="{y0 + h / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 {x0 - 55} {y0 + h / 2})">{escape(p.ylabel)}</text>'
    )
    for i, (s, pts) in enumerate(zip(p.series, data)):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(
            f'<polyline data-series="{escape(s.label)}" points="{coords}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        ly = y0 + 14 + 16 * i
        out.append(f'<line x1="{x0 + w + 10}" y1="{ly}" x2="{x0 + w + 28}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x0 + w + 32}" y="{ly + 4}" font-size="11">{escape(s.label)}</text>')
    return out


def render(panels: list[Panel]) -> str:
    """SVG document with ``panels`` stacked vertically."""
    height = PANEL_H * len(panels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" '
        f'viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif">',
        f'<rect width="{PANEL_W}" height="{height}" fill="white"/>',
    ]
    for i, p in enumerate(panels):
        parts.append(f'<g class="panel" id="panel{i}">')
        parts.extend(_panel(p, i * PANEL_H))
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(panels: list[Panel], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render(panels))
