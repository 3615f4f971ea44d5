"""Pure-Python lane of the shooting kernels.

Mirrors twinwell._shoot step for step (same capped potential, same RK4
tableau, same event tracking) so either lane can back the public kernel API.
Also provides a vectorized batch scanner used for coarse miss-function scans
when the compiled lane is absent.
"""

from __future__ import annotations

import math

import numpy as np


def _grad(nfac, e1sq, e2sq, cap, u1, u2):
    z = complex(u1, u2)
    z2 = z * z
    den1 = z2 + e1sq
    f1 = (z2 - 1.0) / den1
    fp = 2.0 * z * (1.0 + e1sq) / (den1 * den1)
    f = f1
    if nfac == 2:
        den2 = z2 + e2sq
        f2 = (z2 - 1.0) / den2
        fp = fp * f2 + f1 * (2.0 * z * (1.0 + e2sq) / (den2 * den2))
        f = f1 * f2
    w = f.real * f.real + f.imag * f.imag
    p = fp * f.conjugate()
    t = cap / 10.0
    amp = cap - t
    if not math.isfinite(w):
        fac = 0.0
    elif w <= t:
        fac = 1.0
    else:
        th = math.tanh((w - t) / amp)
        fac = 1.0 - th * th
    gx = 2.0 * fac * p.real
    gy = -2.0 * fac * p.imag
    if not (math.isfinite(gx) and math.isfinite(gy)):
        return 0.0, 0.0
    return gx, gy


def potential_value(nfac, e1sq, e2sq, cap, u1, u2):
    """Capped potential value (scalar); mirrors PotentialSpec.value."""
    z = complex(u1, u2)
    z2 = z * z
    f = (z2 - 1.0) / (z2 + e1sq)
    if nfac == 2:
        f = f * ((z2 - 1.0) / (z2 + e2sq))
    w = f.real * f.real + f.imag * f.imag
    t = cap / 10.0
    if not math.isfinite(w):
        return cap
    if w <= t:
        return w
    amp = cap - t
    return t + amp * math.tanh((w - t) / amp)


def integrate(nfac, e1sq, e2sq, cap, u1, u2, v1, v2, drag, step, n_max,
              escape_r, ax, ay, moll_r, pole1, pole2, record_every,
              turn_stop=0, u1_stop=1.2):
    """See twinwell._shoot.integrate; identical contract."""
    esc2 = escape_r * escape_r
    m2 = moll_r * moll_r
    rec_x1 = []
    rec_u = []
    best_d2 = (u1 - ax) ** 2 + (u2 - ay) ** 2
    best_x1 = 0.0
    best_u1, best_u2 = u1, u2
    max_u1 = u1
    if record_every > 0:
        rec_x1.append(0.0)
        rec_u.append((u1, u2))
    def in_zone(a, b):
        hit = a * a + (b - pole1) ** 2 < m2 or a * a + (b + pole1) ** 2 < m2
        if nfac == 2 and not hit:
            hit = a * a + (b - pole2) ** 2 < m2 or a * a + (b + pole2) ** 2 < m2
        return hit

    if in_zone(u1, u2):
        return (2, 0, best_x1, math.sqrt(best_d2), best_u1, best_u2, max_u1,
                np.asarray(rec_x1, dtype=float),
                np.asarray(rec_u, dtype=float).reshape(-1, 2))

    code = 1
    n = 0
    while n < n_max:
        gx, gy = _grad(nfac, e1sq, e2sq, cap, u1, u2)
        k1u1, k1u2 = v1, v2
        k1v1, k1v2 = gx - drag * v1, gy - drag * v2

        gx, gy = _grad(nfac, e1sq, e2sq, cap,
                       u1 + 0.5 * step * k1u1, u2 + 0.5 * step * k1u2)
        k2u1 = v1 + 0.5 * step * k1v1
        k2u2 = v2 + 0.5 * step * k1v2
        k2v1, k2v2 = gx - drag * k2u1, gy - drag * k2u2

        gx, gy = _grad(nfac, e1sq, e2sq, cap,
                       u1 + 0.5 * step * k2u1, u2 + 0.5 * step * k2u2)
        k3u1 = v1 + 0.5 * step * k2v1
        k3u2 = v2 + 0.5 * step * k2v2
        k3v1, k3v2 = gx - drag * k3u1, gy - drag * k3u2

        gx, gy = _grad(nfac, e1sq, e2sq, cap,
                       u1 + step * k3u1, u2 + step * k3u2)
        k4u1 = v1 + step * k3v1
        k4u2 = v2 + step * k3v2
        k4v1, k4v2 = gx - drag * k4u1, gy - drag * k4u2

        u1 += step / 6.0 * (k1u1 + 2.0 * k2u1 + 2.0 * k3u1 + k4u1)
        u2 += step / 6.0 * (k1u2 + 2.0 * k2u2 + 2.0 * k3u2 + k4u2)
        v1 += step / 6.0 * (k1v1 + 2.0 * k2v1 + 2.0 * k3v1 + k4v1)
        v2 += step / 6.0 * (k1v2 + 2.0 * k2v2 + 2.0 * k3v2 + k4v2)
        n += 1
        x1 = n * step

        if u1 > max_u1:
            max_u1 = u1
        d2 = (u1 - ax) ** 2 + (u2 - ay) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best_x1, best_u1, best_u2 = x1, u1, u2
        if record_every > 0 and n % record_every == 0:
            rec_x1.append(x1)
            rec_u.append((u1, u2))

        if in_zone(u1, u2):
            code = 2
            break
        if u1 * u1 + u2 * u2 > esc2:
            code = 0
            break
        if turn_stop:
            if v1 <= 0.0:
                code = 3
                break
            if u1 >= u1_stop:
                code = 4
                break

    return (code, n, best_x1, math.sqrt(best_d2), best_u1, best_u2, max_u1,
            np.asarray(rec_x1, dtype=float),
            np.asarray(rec_u, dtype=float).reshape(-1, 2))


def _grad_batch(nfac, e1sq, e2sq, cap, u):
    """Vectorized capped gradient at points u of shape (n, 2)."""
    z = u[:, 0] + 1j * u[:, 1]
    z2 = z * z
    den1 = z2 + e1sq
    f1 = (z2 - 1.0) / den1
    fp = 2.0 * z * (1.0 + e1sq) / (den1 * den1)
    f = f1
    if nfac == 2:
        den2 = z2 + e2sq
        f2 = (z2 - 1.0) / den2
        fp = fp * f2 + f1 * (2.0 * z * (1.0 + e2sq) / (den2 * den2))
        f = f1 * f2
    w = f.real * f.real + f.imag * f.imag
    p = fp * np.conj(f)
    t = cap / 10.0
    amp = cap - t
    with np.errstate(over="ignore", invalid="ignore"):
        excess = np.where(w > t, w - t, 0.0)
        th = np.tanh(excess / amp)
        fac = np.where(w <= t, 1.0, 1.0 - th * th)
    fac = np.where(np.isfinite(w), fac, 0.0)
    g = np.empty_like(u)
    g[:, 0] = 2.0 * fac * p.real
    g[:, 1] = -2.0 * fac * p.imag
    g[~np.isfinite(g)] = 0.0
    return g


def scan(nfac, e1sq, e2sq, cap, u0, v0, drag, step, n_max, escape_r,
         ax, ay, moll_r, pole1, pole2, turn_stop=0, u1_stop=1.2):
    """Batch RK4 over many initial conditions; no trajectory recording.

    u0, v0: arrays (n, 2).  Returns (codes, best_u2, best_dist, max_u1).
    Rows freeze once they exit; a full batch sweep stops when none are active.
    """
    n = u0.shape[0]
    u = u0.astype(float).copy()
    v = v0.astype(float).copy()
    codes = np.full(n, 1, dtype=np.int64)
    best_d2 = np.sum((u - [ax, ay]) ** 2, axis=1)
    best_u2 = u[:, 1].copy()
    max_u1 = u[:, 0].copy()
    esc2 = escape_r * escape_r
    m2 = moll_r * moll_r
    poles = [pole1] if nfac == 1 else [pole1, pole2]

    def in_zone(uu):
        hit = np.zeros(len(uu), dtype=bool)
        for p in poles:
            hit |= uu[:, 0] ** 2 + (uu[:, 1] - p) ** 2 < m2
            hit |= uu[:, 0] ** 2 + (uu[:, 1] + p) ** 2 < m2
        return hit

    start_flag = in_zone(u)
    codes[start_flag] = 2
    active = ~start_flag

    def accel(uu, vv):
        return _grad_batch(nfac, e1sq, e2sq, cap, uu) - drag * vv

    for k in range(1, n_max + 1):
        if not active.any():
            break
        k1u, k1v = v, accel(u, v)
        u2_, v2_ = u + 0.5 * step * k1u, v + 0.5 * step * k1v
        k2u, k2v = v2_, accel(u2_, v2_)
        u3_, v3_ = u + 0.5 * step * k2u, v + 0.5 * step * k2v
        k3u, k3v = v3_, accel(u3_, v3_)
        u4_, v4_ = u + step * k3u, v + step * k3v
        k4u, k4v = v4_, accel(u4_, v4_)
        du = step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        dv = step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        u = np.where(active[:, None], u + du, u)
        v = np.where(active[:, None], v + dv, v)
        x1 = k * step

        d2 = (u[:, 0] - ax) ** 2 + (u[:, 1] - ay) ** 2
        better = active & (d2 < best_d2)
        best_d2 = np.where(better, d2, best_d2)
        best_u2 = np.where(better, u[:, 1], best_u2)
        max_u1 = np.where(active, np.maximum(max_u1, u[:, 0]), max_u1)

        newly_flagged = active & in_zone(u)
        codes[newly_flagged] = 2
        escaped = active & ~newly_flagged & (u[:, 0] ** 2 + u[:, 1] ** 2 > esc2)
        codes[escaped] = 0
        done = newly_flagged | escaped
        if turn_stop:
            turned = active & ~done & (v[:, 0] <= 0.0)
            codes[turned] = 3
            crossed = active & ~done & ~turned & (u[:, 0] >= u1_stop)
            codes[crossed] = 4
            done |= turned | crossed
        active &= ~done

    return codes, best_u2, np.sqrt(best_d2), max_u1
