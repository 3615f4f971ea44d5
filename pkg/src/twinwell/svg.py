"""Dependency-free SVG plot writer.

Plots are plain polylines in a fixed-size frame; no timestamps or other
run-varying content, so identical data produces byte-identical files.
"""

from __future__ import annotations

import math

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")


class SvgCanvas:
    def __init__(self, xlim, ylim, width: int = 640, height: int = 480,
                 margin: int = 45, title: str = ""):
        self.xlim = xlim
        self.ylim = ylim
        self.w = width
        self.h = height
        self.m = margin
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
            f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
            f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        ]
        if title:
            self.parts.append(
                f'<text x="{width / 2:.1f}" y="{margin - 10}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="14">{title}</text>')
        self._axis_labels()

    def _map(self, x, y):
        fx = (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0])
        fy = (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0])
        return (self.m + fx * (self.w - 2 * self.m),
                self.h - self.m - fy * (self.h - 2 * self.m))

    def _axis_labels(self):
        for frac in (0.0, 0.5, 1.0):
            x = self.xlim[0] + frac * (self.xlim[1] - self.xlim[0])
            y = self.ylim[0] + frac * (self.ylim[1] - self.ylim[0])
            px, _ = self._map(x, self.ylim[0])
            _, py = self._map(self.xlim[0], y)
            self.parts.append(
                f'<text x="{px:.1f}" y="{self.h - self.m + 16}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{x:.4g}</text>')
            self.parts.append(
                f'<text x="{self.m - 6}" y="{py + 3:.1f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{y:.4g}</text>')

    def polyline(self, pts, color: str = "#1f77b4", width: float = 1.5,
                 dashed: bool = False):
        pts = np.asarray(pts, dtype=float)
        if len(pts) < 2:
            return
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in
                          (self._map(x, y) for x, y in pts))
        dash = ' stroke-dasharray="5,4"' if dashed else ""
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash}/>')

    def segments(self, segs, color: str = "#555555", width: float = 0.8):
        for (x0, y0), (x1, y1) in segs:
            p0 = self._map(x0, y0)
            p1 = self._map(x1, y1)
            self.parts.append(
                f'<line x1="{p0[0]:.2f}" y1="{p0[1]:.2f}" x2="{p1[0]:.2f}" '
                f'y2="{p1[1]:.2f}" stroke="{color}" stroke-width="{width}"/>')

    def marker(self, x, y, color: str = "black", radius: float = 3.0):
        px, py = self._map(x, y)
        self.parts.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{radius}" fill="{color}"/>')

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.parts))
            fh.write("\n</svg>\n")


def plot_connections(path_file, curves, poles, title: str = "connections"):
    """Polyline plot of connection curves with pole markers."""
    allpts = np.vstack([np.asarray(getattr(c, "nodes", c)) for c in curves])
    lim = max(1.3, float(np.max(np.abs(allpts))) * 1.1,
              float(np.max(np.abs(poles))) * 1.3 if len(poles) else 0.0)
    cv = SvgCanvas((-lim, lim), (-lim, lim), title=title)
    for k, c in enumerate(curves):
        cv.polyline(np.asarray(getattr(c, "nodes", c)), color=_COLORS[k % len(_COLORS)])
    for p in poles:
        cv.marker(p[0], p[1], color="black")
    cv.marker(1.0, 0.0, color="#2ca02c", radius=4)
    cv.marker(-1.0, 0.0, color="#2ca02c", radius=4)
    cv.save(path_file)


def plot_level_sets(path_file, spec, window: float = 1.6, n: int = 241,
                    n_levels: int = 12, title: str = "level sets"):
    """Marching-squares level sets of the capped potential."""
    from .contours import grid_segments

    xs = np.linspace(-window, window, n)
    ys = np.linspace(-window, window, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = spec.value(np.stack([gx, gy], axis=-1))
    finite = vals[np.isfinite(vals)]
    lo = max(float(np.min(finite)) * 4.0, 1e-3)
    hi = min(float(np.max(finite)), spec.cap_value / 20.0)
    levels = np.geomspace(lo, hi, n_levels)
    cv = SvgCanvas((-window, window), (-window, window), title=title)
    for k, lev in enumerate(levels):
        cv.segments(grid_segments(vals, xs, ys, lev),
                    color=_COLORS[k % len(_COLORS)], width=0.7)
    for p in spec.poles():
        cv.marker(p[0], p[1], color="black")
    cv.save(path_file)


def plot_semilog(path_file, xs, ys, title: str, fit=None):
    """Semi-log decay plot (log10 of y against x), optional fitted line."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    mask = ys > 0
    logy = np.log10(ys[mask])
    cv = SvgCanvas((float(xs.min()), float(xs.max())),
                   (float(logy.min()) - 0.5, float(logy.max()) + 0.5), title=title)
    cv.polyline(np.stack([xs[mask], logy], axis=1))
    if fit is not None:
        m, rate = fit
        fy = np.log10(m) - rate * xs / math.log(10.0)
        cv.polyline(np.stack([xs, fy], axis=1), color="#d62728", dashed=True)
    cv.save(path_file)


def plot_profile(path_file, xs, ys, title: str, hline: float | None = None):
    """Simple x-y polyline (slice actions, junction trajectory)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    pad = 0.05 * (float(ys.max()) - float(ys.min()) + 1e-12)
    cv = SvgCanvas((float(xs.min()), float(xs.max())),
                   (float(ys.min()) - pad, float(ys.max()) + pad), title=title)
    cv.polyline(np.stack([xs, ys], axis=1))
    if hline is not None:
        cv.polyline([(float(xs.min()), hline), (float(xs.max()), hline)],
                    color="#d62728", dashed=True)
    cv.save(path_file)
