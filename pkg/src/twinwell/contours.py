"""Marching-squares contour extraction on rectangular grids."""

from __future__ import annotations

import numpy as np


def _refine_edge(f, p0, p1, g0, refine_iters):
    """Vectorized bisection for f = 0 between paired endpoints p0, p1.

    p0, p1: (m, 2) edge endpoints with opposite signs of f; g0 the sign
    reference at p0.  Returns (m, 2) crossing points.
    """
    lo = p0.copy()
    hi = p1.copy()
    s0 = np.sign(g0)
    for _ in range(refine_iters):
        mid = 0.5 * (lo + hi)
        gm = f(mid)
        take_lo = np.sign(gm) == s0
        lo = np.where(take_lo[:, None], mid, lo)
        hi = np.where(take_lo[:, None], hi, mid)
    return 0.5 * (lo + hi)


def grid_crossings(f, xlim, ylim, n=401, level=0.0, refine_iters=0):
    """Zero-crossing points of f - level on an n x n grid over xlim x ylim.

    f maps an (m, 2) array to (m,) values.  With refine_iters > 0 each
    crossing is polished by bisection along its grid edge, otherwise linear
    interpolation is used.  Returns an (k, 2) array of points.
    """
    xs = np.linspace(xlim[0], xlim[1], n)
    ys = np.linspace(ylim[0], ylim[1], n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    vals = (np.asarray(f(pts)) - level).reshape(n, n)
    finite = np.isfinite(vals)

    out = []

    def collect(a_idx, b_idx):
        ga = vals[a_idx]
        gb = vals[b_idx]
        ok = finite[a_idx] & finite[b_idx] & (np.sign(ga) * np.sign(gb) < 0)
        if not np.any(ok):
            return
        pa = np.stack([gx[a_idx][ok], gy[a_idx][ok]], axis=1)
        pb = np.stack([gx[b_idx][ok], gy[b_idx][ok]], axis=1)
        if refine_iters > 0:
            out.append(_refine_edge(lambda q: np.asarray(f(q)) - level,
                                    pa, pb, ga[ok], refine_iters))
        else:
            t = (ga[ok] / (ga[ok] - gb[ok]))[:, None]
            out.append(pa + t * (pb - pa))

    collect((slice(None, -1), slice(None)), (slice(1, None), slice(None)))
    collect((slice(None), slice(None, -1)), (slice(None), slice(1, None)))
    if not out:
        return np.empty((0, 2))
    return np.vstack(out)


def grid_segments(values, xs, ys, level):
    """Per-cell contour segments of a precomputed field, for plotting.

    values: (nx, ny) array over grid xs, ys.  Returns a list of
    ((x0, y0), (x1, y1)) segments (cells with other than exactly two edge
    crossings are skipped).
    """
    v = values - level
    nx, ny = v.shape
    segs = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1]
            if not all(np.isfinite(c) for c in corners):
                continue
            pts = []
            edges = (
                ((xs[i], ys[j]), (xs[i + 1], ys[j]), corners[0], corners[1]),
                ((xs[i + 1], ys[j]), (xs[i + 1], ys[j + 1]), corners[1], corners[2]),
                ((xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1]), corners[2], corners[3]),
                ((xs[i], ys[j + 1]), (xs[i], ys[j]), corners[3], corners[0]),
            )
            for (p, q, a, b) in edges:
                if np.sign(a) * np.sign(b) < 0:
                    t = a / (a - b)
                    pts.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            if len(pts) == 2:
                segs.append((pts[0], pts[1]))
    return segs


def directed_hausdorff(a, b, chunk=512) -> float:
    """max over points of a of the distance to the set b."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if len(a) == 0:
        return 0.0
    if len(b) == 0:
        return float("inf")
    worst = 0.0
    for k in range(0, len(a), chunk):
        blk = a[k:k + chunk]
        d = np.linalg.norm(blk[:, None, :] - b[None, :, :], axis=2).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def hausdorff(a, b) -> float:
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))
