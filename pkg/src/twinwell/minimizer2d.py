"""Constrained variational minimizer on finite strips.

The discrete energy is the forward-difference cell sum of |grad u|^2/2 plus a
trapezoid nodal sum of the capped potential; its gradient with respect to the
nodal values is exact, so backtracking descent is monotone by construction.
Feasibility (values within distance r of the wells on the outer slabs, values
inside the bounding disk) is enforced by projection inside the line search,
and a folding sweep pushes values into the closed first quadrant on the
fundamental spatial quadrant, extending by equivariance; folding and the disk
clip never increase the discrete energy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .connections import ConnectionResult, Path, profile_on_grid
from .potential import A_MINUS, A_PLUS, ConvexSetC0, MinimaInfo, PotentialSpec


class DomainError(ValueError):
    """Grid does not resolve the strip or the constraint slabs exactly."""


class FoldEnergyError(AssertionError):
    """A fold increased the discrete energy (contract violation)."""


@dataclass(frozen=True)
class StripDomain:
    """Rectangle |x1| <= mu R, |x2| <= R with spacing h and slab onset eta R."""

    R: float
    mu: float
    eta: float
    h: float

    def __post_init__(self):
        if not (0.5 < self.eta < self.mu):
            raise DomainError("need 1/2 < eta < mu")
        for name, val in (("mu*R", self.mu * self.R), ("R", self.R),
                          ("eta*R", self.eta * self.R)):
            ratio = val / self.h
            if abs(ratio - round(ratio)) > 1e-9:
                raise DomainError(f"{name} is not an integer multiple of h")

    @property
    def nx(self) -> int:
        return 2 * int(round(self.mu * self.R / self.h)) + 1

    @property
    def ny(self) -> int:
        return 2 * int(round(self.R / self.h)) + 1

    def x1(self) -> np.ndarray:
        half = self.mu * self.R
        return np.linspace(-half, half, self.nx)

    def x2(self) -> np.ndarray:
        return np.linspace(-self.R, self.R, self.ny)

    @property
    def i_slab(self) -> int:
        """First column index of the right constraint slab (x1 >= eta R)."""
        return int(round((self.mu + self.eta) * self.R / self.h))

    def to_json(self) -> dict:
        return {"R": self.R, "mu": self.mu, "eta": self.eta, "h": self.h}


@dataclass
class Field2D:
    """Two-component nodal field on a strip grid; values[i, j] at (x1_i, x2_j)."""

    values: np.ndarray            # (nx, ny, 2)
    domain: StripDomain
    constraint_r: float

    def copy(self) -> "Field2D":
        return Field2D(self.values.copy(), self.domain, self.constraint_r)

    def equivariance_error(self) -> float:
        """max over grid and group elements of |u(gx) - g u(x)|."""
        v = self.values
        worst = 0.0
        for flip_x, signs in (((slice(None, None, -1), slice(None)), (-1.0, 1.0)),
                              ((slice(None), slice(None, None, -1)), (1.0, -1.0)),
                              ((slice(None, None, -1), slice(None, None, -1)), (-1.0, -1.0))):
            moved = v[flip_x]
            err = np.abs(moved - v * np.array(signs))
            worst = max(worst, float(np.max(err)))
        return worst


@dataclass
class BoundConstants:
    """Closed-form constants of the slab iteration estimate."""

    B: float
    r: float
    r0: float
    c: float
    delta: float
    delta_star: float
    R0: float


def bound_constants(B: float, r: float, r0: float, c: float) -> BoundConstants:
    if not (B > r0 > r > 0 and c > 0):
        raise ValueError("need B > r0 > r > 0 and c > 0")
    delta = (B - r0) / (B - r)
    delta_star = (B - r) / (c * r0)
    R0 = -math.log(r / (2.0 * r0)) / (c * delta)
    return BoundConstants(B=B, r=r, r0=r0, c=c, delta=delta,
                          delta_star=delta_star, R0=R0)


# ---------------------------------------------------------------------------
# field construction


def build_affine(domain: StripDomain, constraint_r: float = 0.25) -> Field2D:
    """Piecewise-affine ramp a- -> a+ over |x1| <= 1, constant outside."""
    x1 = domain.x1()
    ramp = np.clip(x1, -1.0, 1.0)
    vals = np.zeros((domain.nx, domain.ny, 2))
    vals[:, :, 0] = ramp[:, None]
    return Field2D(vals, domain, constraint_r)


def _symmetrized_profile(path: Path, x1: np.ndarray) -> np.ndarray:
    """Path sampled on the grid, made exactly odd/even in (u1, u2)."""
    p = profile_on_grid(path, x1)
    out = np.empty_like(p)
    out[:, 0] = 0.5 * (p[:, 0] - p[::-1, 0])
    out[:, 1] = 0.5 * (p[:, 1] + p[::-1, 1])
    return out


def comparison_map(domain: StripDomain, upper: Path, lower: Path | None = None,
                   constraint_r: float = 0.25) -> Field2D:
    """Blend field: upper profile for x2 >= 1, its mirror for x2 <= -1.

    The canonical equivariant trial field: rows beyond |x2| = 1 carry the two
    minimal connections, linearly interpolated in between.
    """
    x1 = domain.x1()
    ep = _symmetrized_profile(upper, x1)
    em = (_symmetrized_profile(lower, x1) if lower is not None
          else ep * np.array([1.0, -1.0]))
    x2 = domain.x2()
    lam = np.clip((1.0 + x2) / 2.0, 0.0, 1.0)
    vals = lam[None, :, None] * ep[:, None, :] + (1.0 - lam)[None, :, None] * em[:, None, :]
    return Field2D(vals, domain, constraint_r)


# ---------------------------------------------------------------------------
# discrete energy


def _trap_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = 0.5
    w[-1] = 0.5
    return w


def energy_and_gradient(spec: PotentialSpec, field: Field2D):
    """Discrete strip energy and its exact nodal gradient."""
    v = field.values
    dom = field.domain
    wx = _trap_weights(dom.nx)
    wy = _trap_weights(dom.ny)
    dxe = v[1:] - v[:-1]                      # x1 edges
    dye = v[:, 1:] - v[:, :-1]                # x2 edges
    jx = 0.5 * float(np.sum(np.sum(dxe * dxe, axis=2) * wy[None, :]))
    jy = 0.5 * float(np.sum(np.sum(dye * dye, axis=2) * wx[:, None]))
    w, gw = spec.value_and_gradient(v)
    nodal = wx[:, None] * wy[None, :]
    jw = dom.h * dom.h * float(np.sum(w * nodal))
    grad = dom.h * dom.h * nodal[:, :, None] * gw
    wdx = dxe * wy[None, :, None]
    grad[1:] += wdx
    grad[:-1] -= wdx
    wdy = dye * wx[:, None, None]
    grad[:, 1:] += wdy
    grad[:, :-1] -= wdy
    return jx + jy + jw, grad


def energy(spec: PotentialSpec, field: Field2D) -> float:
    return energy_and_gradient(spec, field)[0]


# ---------------------------------------------------------------------------
# energy-nonincreasing maps: fold and clip


def fold(spec: PotentialSpec, field: Field2D, check_tol: float = 1e-8) -> Field2D:
    """Push values into the closed first quadrant on the fundamental quadrant
    of the grid (x1 >= 0, x2 >= 0) and extend by equivariance.

    Requires an equivariant input; the discrete energy cannot increase (the
    per-value map is 1-Lipschitz and the potential is reflection-invariant),
    and this is asserted.
    """
    err = field.equivariance_error()
    if err > check_tol:
        raise ValueError(f"field is not equivariant (error {err:.3e})")
    before, _ = energy_and_gradient(spec, field)
    i0 = (field.domain.nx - 1) // 2
    j0 = (field.domain.ny - 1) // 2
    quad = np.abs(field.values[i0:, j0:])
    out = np.empty_like(field.values)
    out[i0:, j0:] = quad
    out[:i0, j0:] = quad[1:][::-1] * np.array([-1.0, 1.0])
    out[:, :j0] = out[:, j0 + 1:][:, ::-1] * np.array([1.0, -1.0])
    folded = Field2D(out, field.domain, field.constraint_r)
    after, _ = energy_and_gradient(spec, folded)
    if after > before + 1e-12 * max(1.0, abs(before)):
        raise FoldEnergyError(f"fold raised the energy: {before!r} -> {after!r}")
    return folded


def clip(field: Field2D, c0: ConvexSetC0, constraint_r: float | None = None) -> Field2D:
    """Project values onto the bounding disk, then enforce the slab constraint.

    Disk projection is radial (nonexpansive); on the outer slabs values are
    pulled radially onto the sphere of radius r about the matching well.
    """
    r = field.constraint_r if constraint_r is None else constraint_r
    v = field.values.copy()
    norms = np.linalg.norm(v, axis=2)
    scale = np.where(norms > c0.radius, c0.radius / np.maximum(norms, 1e-300), 1.0)
    v *= scale[:, :, None]
    i_slab = field.domain.i_slab
    for sl, well in ((np.s_[i_slab:], A_PLUS), (np.s_[:field.domain.nx - i_slab], A_MINUS)):
        d = v[sl] - well
        dist = np.linalg.norm(d, axis=2)
        fac = np.where(dist > r, r / np.maximum(dist, 1e-300), 1.0)
        v[sl] = well + d * fac[:, :, None]
    return Field2D(v, field.domain, r)


# ---------------------------------------------------------------------------
# solver


@dataclass
class Solve2DOptions:
    max_iter: int = 20000
    tol_rel: float = 1e-10
    stall_window: int = 100
    fold_every: int = 10
    armijo: float = 1e-4
    step0: float = 1e-3
    step_max: float = 10.0


def _symmetrize(v: np.ndarray) -> np.ndarray:
    """Average a field over the group action.

    Roundoff asymmetry is amplified by the stiff pole-region curvature over
    many steps; averaging each trial keeps iterates equivariant to machine
    precision (the energy effect is within line-search acceptance anyway).
    """
    m1 = v[::-1, :, :] * np.array([-1.0, 1.0])
    m2 = v[:, ::-1, :] * np.array([1.0, -1.0])
    m3 = v[::-1, ::-1, :] * np.array([-1.0, -1.0])
    return 0.25 * ((v + m1) + (m2 + m3))


@dataclass
class MinimizeReport:
    energy_trace: list = dc_field(default_factory=list)
    grad_norm_final: float = 0.0
    iterations: int = 0
    converged: bool = False
    stalled: bool = False
    fold_count: int = 0
    equivariance_error: float = 0.0
    decay_fit: tuple | None = None          # (M, rate)
    cosh_check: dict | None = None
    subsolution_check: dict | None = None
    slice_actions: list | None = None
    normalized_energy: float | None = None
    x2_energy: float | None = None
    slice_limit_distances: tuple | None = None
    upper_bound: dict | None = None
    interior_residual: float | None = None

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["energy_trace"] = [float(x) for x in self.energy_trace]
        return d


def minimize(spec: PotentialSpec, field0: Field2D, c0: ConvexSetC0,
             opts: Solve2DOptions | None = None, *,
             minima: MinimaInfo | None = None,
             connections: list[ConnectionResult] | None = None):
    """Projected gradient descent with backtracking, periodic folding.

    Trial steps are seeded by a Barzilai-Borwein estimate and backtracked
    until the projected step decreases the energy, so the recorded trace is
    non-increasing through every step, fold, and clip.  Returns the final
    field and a report; decay/cosh/slice sections are filled when minima and
    connections are supplied.
    """
    opts = opts or Solve2DOptions()
    if minima is not None and field0.constraint_r >= minima.r0:
        raise ValueError("constraint radius r must be below the convexity radius r0")
    err0 = field0.equivariance_error()
    if err0 > 1e-8:
        raise ValueError(f"initial field is not equivariant (error {err0:.3e})")

    report = MinimizeReport()
    u = clip(field0, c0)
    J, g = energy_and_gradient(spec, u)
    report.energy_trace.append(J)
    alpha = opts.step0
    prev_v = prev_g = None
    it = 0
    while it < opts.max_iter:
        it += 1
        if prev_v is not None:
            s = u.values - prev_v
            y = g - prev_g
            sy = float(np.sum(s * y))
            if sy > 0:
                alpha = min(max(float(np.sum(s * s)) / sy, 1e-10), opts.step_max)
        accepted = False
        a = alpha
        while a > 1e-18:
            trial = clip(Field2D(_symmetrize(u.values - a * g), u.domain,
                                 u.constraint_r), c0)
            Jt, gt = energy_and_gradient(spec, trial)
            decrease = float(np.sum(g * (u.values - trial.values)))
            if Jt <= J - opts.armijo * decrease:
                accepted = True
                break
            a *= 0.5
        if not accepted:
            report.stalled = True
            break
        prev_v, prev_g = u.values, g
        u, J, g = trial, Jt, gt
        report.energy_trace.append(J)
        if it % opts.fold_every == 0:
            u = fold(spec, u)
            J, g = energy_and_gradient(spec, u)
            report.fold_count += 1
            report.energy_trace.append(J)
            prev_v = prev_g = None
        tr = report.energy_trace
        if len(tr) > opts.stall_window:
            if tr[-opts.stall_window - 1] - tr[-1] < opts.tol_rel * max(1.0, abs(tr[-1])):
                report.converged = True
                break

    u = fold(spec, u)
    report.fold_count += 1
    u = clip(u, c0)
    J, g = energy_and_gradient(spec, u)
    report.energy_trace.append(J)
    report.iterations = it
    report.grad_norm_final = float(np.max(np.abs(g)))
    report.equivariance_error = u.equivariance_error()

    if minima is not None:
        bc = verify_bounds(spec, u, minima)
        report.decay_fit = (bc["decay_M"], bc["decay_rate"])
        report.cosh_check = {k: bc[k] for k in
                             ("cosh_violations", "cosh_max_excess", "cosh_tol")}
        report.subsolution_check = {k: bc[k] for k in
                                    ("subsolution_violations", "subsolution_min")}
    if connections is not None:
        sd = slice_diagnostics(spec, u, connections)
        report.slice_actions = sd["slice_actions"]
        report.normalized_energy = sd["normalized_energy"]
        report.x2_energy = sd["x2_energy"]
        report.slice_limit_distances = sd["slice_limit_distances"]
        report.upper_bound = {"J": sd["J"], "J_comparison": sd["J_comparison"],
                              "E_min": sd["E_min"], "lower_bound": sd["lower_bound"]}
    report.interior_residual = interior_residual(spec, u, c0)
    return u, report


# ---------------------------------------------------------------------------
# verification


def _rho_plus(field: Field2D) -> np.ndarray:
    return np.linalg.norm(field.values - A_PLUS, axis=2)


def verify_bounds(spec: PotentialSpec, field: Field2D, minima: MinimaInfo) -> dict:
    """Slab localization checks on a converged field.

    (a) pointwise barrier rho+ <= r cosh(c (mu R - x1)) / cosh(c (mu-eta) R)
        + 10 h^2 on the right slab; (b) exponential fit of the column maxima
    of rho+ over x1 in [1, eta R]; (c) discrete subsolution test
    lap rho+ >= c^2 rho+ - tol on the slab interior.
    """
    dom = field.domain
    c = minima.c
    r = field.constraint_r
    h = dom.h
    tol = 10.0 * h * h
    x1 = dom.x1()
    rho = _rho_plus(field)

    i_slab = dom.i_slab
    xs = x1[i_slab:]
    bound = r * np.cosh(c * (dom.R * dom.mu - xs)) / math.cosh(c * (dom.mu - dom.eta) * dom.R)
    excess = rho[i_slab:] - (bound[:, None] + tol)
    cosh_violations = int(np.sum(excess > 0))
    cosh_max_excess = float(np.max(excess))

    lo = int(round((dom.mu * dom.R + 1.0) / h))
    hi = i_slab
    cols = np.max(rho[lo:hi + 1], axis=1)
    xcols = x1[lo:hi + 1]
    mask = cols > 1e-300
    slope, intercept = np.polyfit(xcols[mask], np.log(cols[mask]), 1)
    decay_rate = float(-slope)
    decay_M = float(math.exp(intercept))

    lap = (rho[i_slab + 1:-1, 1:-1] * 0.0)
    block = rho[i_slab:, :]
    lap = (block[2:, 1:-1] + block[:-2, 1:-1] + block[1:-1, 2:] + block[1:-1, :-2]
           - 4.0 * block[1:-1, 1:-1]) / (h * h)
    sub = lap - c * c * block[1:-1, 1:-1]
    subsolution_min = float(np.min(sub))
    subsolution_violations = int(np.sum(sub < -tol))

    return {
        "cosh_violations": cosh_violations,
        "cosh_max_excess": cosh_max_excess,
        "cosh_tol": tol,
        "decay_M": decay_M,
        "decay_rate": decay_rate,
        "subsolution_min": subsolution_min,
        "subsolution_violations": subsolution_violations,
    }


def row_energy(spec: PotentialSpec, field: Field2D) -> np.ndarray:
    """1D connection energy of every horizontal slice."""
    v = field.values
    h = field.domain.h
    d = np.diff(v, axis=0)
    kin = 0.5 * np.sum(d * d, axis=2) / h
    w = spec.value(v)
    pot = 0.5 * (w[1:] + w[:-1]) * h
    return np.sum(kin + pot, axis=0)


def slice_diagnostics(spec: PotentialSpec, field: Field2D,
                      connections: list[ConnectionResult]) -> dict:
    """Row energies vs the minimal connection action, plus the upper bound
    against the comparison blend built from the minimal pair."""
    offaxis = [c for c in connections if c.path.classification in ("upper", "lower")]
    if not offaxis:
        raise ValueError("need the minimal off-axis connection pair")
    emin_conn = min(offaxis, key=lambda c: c.action)
    e_min = emin_conn.action
    upper = emin_conn.path if emin_conn.path.classification == "upper" \
        else emin_conn.path.mirrored()

    dom = field.domain
    rows = row_energy(spec, field)
    x2 = dom.x2()
    J, _ = energy_and_gradient(spec, field)

    tilde = comparison_map(dom, upper, constraint_r=field.constraint_r)
    J_tilde, _ = energy_and_gradient(spec, tilde)

    dye = np.diff(field.values, axis=1)
    wx = _trap_weights(dom.nx)
    x2_energy = float(np.sum(np.sum(dye * dye, axis=2) * wx[:, None]))

    ep = _symmetrized_profile(upper, dom.x1())
    em = ep * np.array([1.0, -1.0])
    d_top = float(np.max(np.linalg.norm(field.values[:, -1, :] - ep, axis=1)))
    d_bot = float(np.max(np.linalg.norm(field.values[:, 0, :] - em, axis=1)))

    return {
        "slice_actions": [(float(a), float(b)) for a, b in zip(x2, rows)],
        "min_row_energy": float(np.min(rows)),
        "E_min": float(e_min),
        "normalized_energy": float(J / (2.0 * dom.R)),
        "x2_energy": x2_energy,
        "slice_limit_distances": (d_top, d_bot),
        "J": float(J),
        "J_comparison": float(J_tilde),
        "lower_bound": float(2.0 * dom.R * (e_min - 5.0 * dom.h)),
    }


def interior_residual(spec: PotentialSpec, field: Field2D, c0: ConvexSetC0) -> float:
    """max |lap u - W_u(u)| over clip-inactive interior nodes, normalized."""
    v = field.values
    h = field.domain.h
    lap = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2]
           - 4.0 * v[1:-1, 1:-1]) / (h * h)
    gw = spec.gradient(v[1:-1, 1:-1])
    res = np.linalg.norm(lap - gw, axis=2)

    dom = field.domain
    i_slab = dom.i_slab
    active = np.zeros(v.shape[:2], dtype=bool)
    active |= np.linalg.norm(v, axis=2) >= c0.radius - 1e-12
    r = field.constraint_r
    dplus = np.linalg.norm(v - A_PLUS, axis=2)
    dminus = np.linalg.norm(v - A_MINUS, axis=2)
    cols = np.arange(dom.nx)
    in_plus = cols >= i_slab
    in_minus = cols <= dom.nx - 1 - i_slab
    active |= in_plus[:, None] & (dplus >= r - 1e-12)
    active |= in_minus[:, None] & (dminus >= r - 1e-12)

    free = ~active[1:-1, 1:-1]
    if not np.any(free):
        return 0.0
    scale = max(1.0, float(np.max(np.linalg.norm(gw[free], axis=1))))
    return float(np.max(res[free])) / scale


# ---------------------------------------------------------------------------
# checkpointing


def save_checkpoint(field: Field2D, csv_path, sidecar_path, *,
                    iteration: int = 0, energy_tail=()):
    from .artifacts import write_field_csv, write_json

    write_field_csv(csv_path, field)
    write_json(sidecar_path, {
        "iteration": int(iteration),
        "energy_tail": [float(x) for x in energy_tail],
        "constraint_r": field.constraint_r,
        "domain": field.domain.to_json(),
    })


def load_checkpoint(csv_path, sidecar_path) -> tuple[Field2D, dict]:
    from .artifacts import read_field_csv

    with open(sidecar_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    dom = StripDomain(**meta["domain"])
    field = read_field_csv(csv_path, dom, meta["constraint_r"])
    return field, meta
