"""Static log-log SVG line plots of experiment CSVs.

The output is a pure function of the CSV text and the PlotSpec: no fonts,
timestamps or external assets, and every coordinate is printed with fixed
precision.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from kout.errors import UnknownColumn

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
          "#7f7f7f")


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: str
    group: str | None = None
    title: str = ""
    slopes: bool = True


def read_csv_text(text: str) -> tuple[list[str], list[dict]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        return [], []
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    rows = list(reader)
    return list(reader.fieldnames or []), rows


def _num(s) -> float | None:
    try:
        v = float(s)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) and v > 0 else None


def _series(header: list[str], rows: list[dict], spec: PlotSpec) -> dict[str, list]:
    if header:
        for col in (spec.x, spec.y, spec.group):
            if col is not None and col not in header:
                raise UnknownColumn(f"unknown column {col!r}; have {', '.join(header)}")
    series: dict[str, list] = {}
    for row in rows:
        key = row[spec.group] if spec.group else spec.y
        pts = series.setdefault(key, [])
        x, y = _num(row[spec.x]), _num(row[spec.y])
        if x is not None and y is not None:
            pts.append((x, y))
    for key in series:
        series[key].sort()
    return series


def loglog_slope(points) -> float | None:
    """Least-squares slope of log y against log x."""
    xs = {p[0] for p in points}
    if len(xs) < 2:
        return None
    lx = np.log([p[0] for p in points])
    ly = np.log([p[1] for p in points])
    return float(np.polyfit(lx, ly, 1)[0])


def _ticks(lo: float, hi: float) -> list[float]:
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(a, b + 1)]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def plot(csv_text: str, spec: PlotSpec) -> str:
    header, rows = read_csv_text(csv_text)
    series = _series(header, rows, spec)
    pts = [p for s in series.values() for p in s]
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0, x1, y0, y1 = 1.0, 10.0, 1.0, 10.0
    lx0, lx1 = math.log10(x0) - 0.05, math.log10(x1) + 0.05
    ly0, ly1 = math.log10(y0) - 0.05, math.log10(y1) + 0.05

    def sx(x):
        return LEFT + (math.log10(x) - lx0) / (lx1 - lx0) * pw

    def sy(y):
        return TOP + ph - (math.log10(y) - ly0) / (ly1 - ly0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">'
        f'{_esc(spec.x)} (log)</text>',
        f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">{_esc(spec.y)} (log)</text>',
    ]
    if spec.title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="22" text-anchor="middle" '
                   f'font-size="13">{_esc(spec.title)}</text>')
    for t in _ticks(10 ** lx0, 10 ** lx1):
        if lx0 <= math.log10(t) <= lx1:
            X = sx(t)
            out.append(f'<line x1="{X:.2f}" y1="{TOP + ph}" x2="{X:.2f}" y2="{TOP + ph + 5}" '
                       f'stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{TOP + ph + 17}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(10 ** ly0, 10 ** ly1):
        if ly0 <= math.log10(t) <= ly1:
            Y = sy(t)
            out.append(f'<line x1="{LEFT - 5}" y1="{Y:.2f}" x2="{LEFT}" y2="{Y:.2f}" '
                       f'stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:g}</text>')
    for i, (name, spts) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        if spts:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in spts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"/>')
            for x, y in spts:
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>')
        label = f"{spec.group}={name}" if spec.group else name
        slope = loglog_slope(spts) if spec.slopes else None
        if slope is not None:
            label += f" (slope {slope:.2f})"
        ly = TOP + 14 + 16 * i
        lxp = LEFT + pw + 10
        out.append(f'<line x1="{lxp}" y1="{ly - 4}" x2="{lxp + 18}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lxp + 24}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
