# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fixed-step RK4 trajectory integrator for the planar two-well systems.

Compiled lane of the shooting kernels.  Semantics must stay in lockstep with
twinwell._shoot_py (the pure-Python mirror selected when this extension is
unavailable): same capped potential, same RK4 tableau, same event tracking.
"""

import numpy as np

from libc.math cimport isfinite, sqrt, tanh


cdef struct GradOut:
    double gx
    double gy


cdef inline void _grad(int nfac, double e1sq, double e2sq, double cap,
                       double u1, double u2, GradOut* out) nogil:
    """Gradient of the capped potential |F(z)|^2 at u = (u1, u2)."""
    cdef double complex z = u1 + 1j * u2
    cdef double complex z2 = z * z
    cdef double complex den1, den2, f1, f2, f, fp, p
    cdef double w, t, amp, th, fac

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
    if not isfinite(w):
        fac = 0.0
    elif w <= t:
        fac = 1.0
    else:
        th = tanh((w - t) / amp)
        fac = 1.0 - th * th
    out.gx = 2.0 * fac * p.real
    out.gy = -2.0 * fac * p.imag
    if not isfinite(out.gx) or not isfinite(out.gy):
        out.gx = 0.0
        out.gy = 0.0


def potential_value(int nfac, double e1sq, double e2sq, double cap,
                    double u1, double u2):
    """Capped potential value (scalar); mirrors PotentialSpec.value."""
    cdef double complex z = u1 + 1j * u2
    cdef double complex z2 = z * z
    cdef double complex f = (z2 - 1.0) / (z2 + e1sq)
    cdef double w, t, amp
    if nfac == 2:
        f = f * ((z2 - 1.0) / (z2 + e2sq))
    w = f.real * f.real + f.imag * f.imag
    t = cap / 10.0
    amp = cap - t
    if not isfinite(w):
        return cap
    if w <= t:
        return w
    return t + amp * tanh((w - t) / amp)


def integrate(int nfac, double e1sq, double e2sq, double cap,
              double u1, double u2, double v1, double v2,
              double drag, double step, long n_max, double escape_r,
              double ax, double ay, double moll_r,
              double pole1, double pole2, long record_every,
              int turn_stop=0, double u1_stop=1.2):
    """Integrate u'' = grad W(u) - drag * u' by RK4 with fixed step.

    Returns (exit_code, n_steps, best_x1, best_dist, best_u1, best_u2,
    max_u1, rec_x1, rec_u) where exit_code is 0 (left the bounding disk),
    1 (step budget exhausted), 2 (entered a pole's mollification zone),
    3 (first u1-turnaround, only with turn_stop) or 4 (u1 passed u1_stop,
    only with turn_stop).  best_* track the closest approach to (ax, ay).
    """
    cdef double x1 = 0.0
    cdef double best_d2, d2, dy, esc2, m2
    cdef double k1u1, k1u2, k1v1, k1v2
    cdef double k2u1, k2u2, k2v1, k2v2
    cdef double k3u1, k3u2, k3v1, k3v2
    cdef double k4u1, k4u2, k4v1, k4v2
    cdef double best_x1, best_u1, best_u2, max_u1
    cdef long n = 0, nrec = 0, cap_rec
    cdef int code = 1
    cdef GradOut g

    esc2 = escape_r * escape_r
    m2 = moll_r * moll_r

    cap_rec = 0
    if record_every > 0:
        cap_rec = n_max // record_every + 2
    rec_x1 = np.empty(cap_rec, dtype=np.float64)
    rec_u = np.empty((cap_rec, 2), dtype=np.float64)
    cdef double[::1] rx = rec_x1
    cdef double[:, ::1] ru = rec_u

    best_d2 = (u1 - ax) * (u1 - ax) + (u2 - ay) * (u2 - ay)
    best_x1 = 0.0
    best_u1 = u1
    best_u2 = u2
    max_u1 = u1

    if record_every > 0:
        rx[0] = 0.0
        ru[0, 0] = u1
        ru[0, 1] = u2
        nrec = 1

    # starting inside a pole's mollification zone flags the shot immediately
    dy = u2 - pole1
    if u1 * u1 + dy * dy < m2:
        code = 2
    dy = u2 + pole1
    if u1 * u1 + dy * dy < m2:
        code = 2
    if nfac == 2:
        dy = u2 - pole2
        if u1 * u1 + dy * dy < m2:
            code = 2
        dy = u2 + pole2
        if u1 * u1 + dy * dy < m2:
            code = 2
    if code == 2:
        return (code, 0, best_x1, sqrt(best_d2), best_u1, best_u2, max_u1,
                rec_x1[:nrec].copy(), rec_u[:nrec].copy())

    while n < n_max:
        _grad(nfac, e1sq, e2sq, cap, u1, u2, &g)
        k1u1 = v1
        k1u2 = v2
        k1v1 = g.gx - drag * v1
        k1v2 = g.gy - drag * v2

        _grad(nfac, e1sq, e2sq, cap,
              u1 + 0.5 * step * k1u1, u2 + 0.5 * step * k1u2, &g)
        k2u1 = v1 + 0.5 * step * k1v1
        k2u2 = v2 + 0.5 * step * k1v2
        k2v1 = g.gx - drag * k2u1
        k2v2 = g.gy - drag * k2u2

        _grad(nfac, e1sq, e2sq, cap,
              u1 + 0.5 * step * k2u1, u2 + 0.5 * step * k2u2, &g)
        k3u1 = v1 + 0.5 * step * k2v1
        k3u2 = v2 + 0.5 * step * k2v2
        k3v1 = g.gx - drag * k3u1
        k3v2 = g.gy - drag * k3u2

        _grad(nfac, e1sq, e2sq, cap,
              u1 + step * k3u1, u2 + step * k3u2, &g)
        k4u1 = v1 + step * k3v1
        k4u2 = v2 + step * k3v2
        k4v1 = g.gx - drag * k4u1
        k4v2 = g.gy - drag * k4u2

        u1 += step / 6.0 * (k1u1 + 2.0 * k2u1 + 2.0 * k3u1 + k4u1)
        u2 += step / 6.0 * (k1u2 + 2.0 * k2u2 + 2.0 * k3u2 + k4u2)
        v1 += step / 6.0 * (k1v1 + 2.0 * k2v1 + 2.0 * k3v1 + k4v1)
        v2 += step / 6.0 * (k1v2 + 2.0 * k2v2 + 2.0 * k3v2 + k4v2)
        n += 1
        x1 = n * step

        if u1 > max_u1:
            max_u1 = u1

        d2 = (u1 - ax) * (u1 - ax) + (u2 - ay) * (u2 - ay)
        if d2 < best_d2:
            best_d2 = d2
            best_x1 = x1
            best_u1 = u1
            best_u2 = u2

        if record_every > 0 and n % record_every == 0:
            rx[nrec] = x1
            ru[nrec, 0] = u1
            ru[nrec, 1] = u2
            nrec += 1

        dy = u2 - pole1
        if u1 * u1 + dy * dy < m2:
            code = 2
            break
        dy = u2 + pole1
        if u1 * u1 + dy * dy < m2:
            code = 2
            break
        if nfac == 2:
            dy = u2 - pole2
            if u1 * u1 + dy * dy < m2:
                code = 2
                break
            dy = u2 + pole2
            if u1 * u1 + dy * dy < m2:
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

    return (code, n, best_x1, sqrt(best_d2), best_u1, best_u2, max_u1,
            rec_x1[:nrec].copy(), rec_u[:nrec].copy())
