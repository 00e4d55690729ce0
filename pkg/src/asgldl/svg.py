"""Minimal deterministic SVG writers (scatter heat plots, line charts, histograms)."""

from __future__ import annotations

import numpy as np

# viridis anchor colours, linearly interpolated
_VIRIDIS = np.array([
    [68, 1, 84], [72, 40, 120], [62, 74, 137], [49, 104, 142], [38, 130, 142],
    [31, 158, 137], [53, 183, 121], [109, 205, 89], [180, 222, 44], [253, 231, 37],
], dtype=float)


def colormap(t: float) -> str:
    t = min(max(float(t), 0.0), 1.0) * (len(_VIRIDIS) - 1)
    i = min(int(t), len(_VIRIDIS) - 2)
    rgb = _VIRIDIS[i] + (t - i) * (_VIRIDIS[i + 1] - _VIRIDIS[i])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.items: list[str] = []

    def circle(self, x, y, r, fill):
        self.items.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{fill}"/>')

    def rect(self, x, y, w, h, fill, stroke="none"):
        self.items.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
                          f'height="{_fmt(h)}" fill="{fill}" stroke="{stroke}"/>')

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0):
        self.items.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
                          f'y2="{_fmt(y2)}" stroke="{stroke}" stroke-width="{_fmt(width)}"/>')

    def polyline(self, xs, ys, stroke="#000", width=1.5):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_fmt(width)}"/>')

    def text(self, x, y, s, size=12, anchor="middle"):
        s = s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        self.items.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
                          f'font-family="sans-serif" text-anchor="{anchor}">{s}</text>')

    def to_string(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">')
        body = "\n".join(self.items)
        return f'{head}\n<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_string())


def sphere_panel(canvas: Canvas, points: np.ndarray, values: np.ndarray, cx: float, cy: float,
                 radius: float, view: np.ndarray, title: str = "") -> None:
    """Orthographic view of the hemisphere facing ``view``; dot colour encodes ``values``."""
    view = np.asarray(view, dtype=float)
    view = view / np.linalg.norm(view)
    up = np.array([0.0, 0.0, 1.0]) if abs(view[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
    ex = np.cross(up, view)
    ex /= np.linalg.norm(ex)
    ey = np.cross(view, ex)
    depth = points @ view
    vmax = float(values.max()) if values.max() > 0 else 1.0
    canvas.circle(cx, cy, radius, "#eeeeee")
    dot_r = max(1.0, 1.6 * radius / np.sqrt(len(points)))
    # back to front so nearer dots are painted last
    for k in np.argsort(depth, kind="stable"):
        if depth[k] < 0:
            continue
        px = cx + radius * float(points[k] @ ex)
        py = cy - radius * float(points[k] @ ey)
        canvas.circle(px, py, dot_r, colormap(values[k] / vmax))
    if title:
        canvas.text(cx, cy + radius + 18, title)


def line_chart(path, series: dict[str, tuple[np.ndarray, np.ndarray]], title: str,
               xlabel: str, ylabel: str, width=560, height=360) -> None:
    cv = Canvas(width, height)
    left, right, top, bottom = 60, 20, 30, 50
    xs_all = np.concatenate([np.asarray(s[0], float) for s in series.values()])
    ys_all = np.concatenate([np.asarray(s[1], float) for s in series.values()])
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = float(min(ys_all.min(), 0.0)), float(max(ys_all.max(), 0.0))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def sy(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    cv.line(left, sy(0.0), width - right, sy(0.0), stroke="#999")
    cv.line(left, top, left, height - bottom, stroke="#000")
    cv.line(left, height - bottom, width - right, height - bottom, stroke="#000")
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    for n, (name, (xs, ys)) in enumerate(series.items()):
        colour = palette[n % len(palette)]
        cv.polyline([sx(x) for x in xs], [sy(y) for y in ys], stroke=colour)
        cv.text(width - right - 4, top + 14 * (n + 1), name, size=11, anchor="end")
        cv.line(width - right - 120, top + 14 * (n + 1) - 4, width - right - 100,
                top + 14 * (n + 1) - 4, stroke=colour, width=2)
    for v, lab in ((x0, f"{x0:g}"), (x1, f"{x1:g}")):
        cv.text(sx(v), height - bottom + 16, lab, size=10)
    for v in (y0, y1):
        cv.text(left - 6, sy(v) + 4, f"{v:.3g}", size=10, anchor="end")
    cv.text(width / 2, 18, title, size=13)
    cv.text(width / 2, height - 12, xlabel, size=11)
    cv.text(14, height / 2, ylabel, size=11, anchor="start")
    cv.save(path)


def histogram(path, values: np.ndarray, bins: int, title: str, xlabel: str,
              width=560, height=360) -> None:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    cv = Canvas(width, height)
    left, right, top, bottom = 60, 20, 30, 50
    cmax = max(int(counts.max()), 1)
    bw = (width - left - right) / len(counts)
    for n, c in enumerate(counts):
        h = (height - top - bottom) * c / cmax
        cv.rect(left + n * bw, height - bottom - h, bw * 0.95, h, "#1f77b4")
    cv.line(left, height - bottom, width - right, height - bottom)
    cv.text(left, height - bottom + 16, f"{edges[0]:.3g}", size=10)
    cv.text(width - right, height - bottom + 16, f"{edges[-1]:.3g}", size=10)
    cv.text(left - 6, top + 4, str(cmax), size=10, anchor="end")
    cv.text(width / 2, 18, title, size=13)
    cv.text(width / 2, height - 12, xlabel, size=11)
    cv.save(path)
