"""Minimal single-panel SVG line plots, no plotting library required."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=30, bottom=55)
COLORS = ("#1f4e9c", "#c0392b", "#27ae60", "#8e44ad")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = 10 ** np.floor(np.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    return list(np.arange(np.ceil(lo / step) * step, hi + 0.5 * step, step))


def line_plot(series: list[tuple[np.ndarray, np.ndarray, str]], path: str | Path,
              xlabel: str, ylabel: str, title: str = "") -> Path:
    """Draw each (x, y, label) as a polyline; needs at least two points per series."""
    if not series:
        raise ValueError("nothing to plot")
    clean = []
    for x, y, lab in series:
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if ok.sum() < 2:
            raise ValueError(f"series {lab!r} has fewer than two finite points")
        clean.append((x[ok], y[ok], lab))
    xs = np.concatenate([c[0] for c in clean])
    ys = np.concatenate([c[1] for c in clean])
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (1 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           'fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{MARGIN["top"] + ph}" x2="{px(t):.2f}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{MARGIN["top"] + ph + 18}" '
                   f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{py(t):.2f}" x2="{MARGIN["left"]}" '
                   f'y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{py(t) + 4:.2f}" '
                   f'text-anchor="end">{t:g}</text>')
    for i, (x, y, lab) in enumerate(clean):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        col = COLORS[i % len(COLORS)]
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        if lab:
            out.append(f'<text x="{MARGIN["left"] + 10}" y="{MARGIN["top"] + 16 + 15 * i}" '
                       f'fill="{col}">{escape(lab)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 12}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(16,{MARGIN["top"] + ph / 2}) rotate(-90)" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def plot_profile(profile, path) -> Path:
    return line_plot([(profile.x, profile.g, f"C = {profile.C:g}")], path,
                     "x (mean free paths, front at 0)", "g(x)", "intricacy wave")


def plot_front_track(times, positions, path, speed=None) -> Path:
    series = [(times, positions, "front position")]
    if speed is not None:
        series.append((times, speed * np.asarray(times, float), f"{speed:.4f} t"))
    return line_plot(series, path, "t (mean free times)", "front z (mean free paths)")
