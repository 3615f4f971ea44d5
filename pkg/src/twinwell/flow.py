"""Parabolic gradient flow on the strip and the interface wave.

A two-phase initial field carries one connection profile above a split row
and another below it.  Under u_t = eps^2 lap u - W_u(u) the junction between
the two profile types drifts toward the territory of the costlier profile
(the cheaper phase grows); the drift speed is measured by a least-squares fit
of the tracked junction position.  A damped-shooting utility estimates the
traveling-connection drag coefficient for the 1D problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .connections import BracketError, Path, profile_on_grid
from .minimizer2d import Field2D, StripDomain, energy_and_gradient
from .potential import A_MINUS, PotentialSpec, hessian_batch


class FlowError(RuntimeError):
    pass


@dataclass
class FlowState:
    field: Field2D
    time: float
    dt: float
    eps_flow: float
    junction_history: list = dc_field(default_factory=list)
    upper_profile: np.ndarray | None = None
    lower_profile: np.ndarray | None = None
    steps_taken: int = 0


def _lipschitz_bound(spec: PotentialSpec, values: np.ndarray) -> float:
    """Largest Hessian spectral norm over the visited value set.

    Sampling the whole bounding set is useless here (the capped poles carry
    enormous curvature that the flow never visits), so the bound comes from
    the initial data itself, evaluated at every node.
    """
    pts = values.reshape(-1, 2)
    h = hessian_batch(spec, pts)
    tr = h[:, 0, 0] + h[:, 1, 1]
    det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
    disc = np.sqrt(np.maximum(tr * tr / 4.0 - det, 0.0))
    return float(np.max(np.abs(tr / 2.0) + disc))


def _push_off_poles(spec: PotentialSpec, vals: np.ndarray, clearance: float) -> np.ndarray:
    """Move values closer than ``clearance`` to a pole radially out to it.

    A pointwise blend of two profiles that enclose a pole unavoidably sweeps
    past it; the repulsion near the capped pole would demand a uselessly tiny
    explicit time step, and the flow immediately pinches the transition
    around the pole anyway, so the initial data starts there.
    """
    if clearance <= 0:
        return vals
    out = vals.copy()
    flat = out.reshape(-1, 2)
    for pole in spec.poles():
        d = flat - pole
        dist = np.linalg.norm(d, axis=1)
        close = dist < clearance
        if not np.any(close):
            continue
        safe_dir = d[close]
        norms = np.maximum(dist[close], 1e-300)[:, None]
        unit = np.where(norms > 1e-200, safe_dir / norms,
                        np.tile([0.0, 1.0], (int(np.sum(close)), 1)))
        flat[close] = pole + clearance * unit
    return out


def stable_dt(spec: PotentialSpec, field: Field2D, eps_flow: float) -> float:
    """0.2 min(h^2 / (4 eps^2), 1/L) with L sampled over the initial values."""
    lip = _lipschitz_bound(spec, field.values)
    h = field.domain.h
    return 0.2 * min(h * h / (4.0 * eps_flow * eps_flow), 1.0 / max(lip, 1e-12))


def init_two_phase(domain: StripDomain, upper: Path, lower: Path, x2_split: float,
                   *, spec: PotentialSpec, eps_flow: float = 1.0,
                   dt: float | None = None, pole_clearance: float = 0.35) -> FlowState:
    """Rows above the split carry the first profile, rows below the second,
    with a two-row linear blend at the split (blend values repelled from the
    pole neighborhoods, see _push_off_poles)."""
    if upper.x1 is None or lower.x1 is None:
        raise FlowError("profiles must be x1-parameterized connections")
    x1 = domain.x1()
    x2 = domain.x2()
    pu = profile_on_grid(upper, x1)
    pl = profile_on_grid(lower, x1)
    h = domain.h
    lam = np.clip((x2 - (x2_split - h)) / (2.0 * h), 0.0, 1.0)
    vals = (lam[None, :, None] * pu[:, None, :]
            + (1.0 - lam)[None, :, None] * pl[:, None, :])
    vals = _push_off_poles(spec, vals, pole_clearance)
    field = Field2D(vals, domain, constraint_r=math.inf)
    state = FlowState(field=field, time=0.0, dt=0.0, eps_flow=eps_flow,
                      upper_profile=pu, lower_profile=pl)
    state.dt = dt if dt is not None else stable_dt(spec, field, eps_flow)
    pos = junction_position(state)
    state.junction_history.append((0.0, x2_split if pos is None else pos))
    return state


def junction_position(state: FlowState):
    """x2 where the rows switch nearest-profile identity (linear interp).

    None when every row matches one profile (static or converted states).
    """
    v = state.field.values
    du = v - state.upper_profile[:, None, :]
    dl = v - state.lower_profile[:, None, :]
    d_up = np.max(np.linalg.norm(du, axis=2), axis=0)
    d_lo = np.max(np.linalg.norm(dl, axis=2), axis=0)
    s = d_up - d_lo          # negative where the row looks like the upper profile
    x2 = state.field.domain.x2()
    sign = np.sign(s)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(flips) == 0:
        return None
    j = int(flips[-1])
    t = s[j] / (s[j] - s[j + 1])
    return float(x2[j] + t * (x2[j + 1] - x2[j]))


def evolve(state: FlowState, spec: PotentialSpec, t_end: float, *,
           record_every: int = 10, energy_check_every: int = 10,
           blowup_radius: float = 10.0) -> FlowState:
    """Explicit Euler steps of u_t = eps^2 lap u - W_u(u) up to t_end.

    One-sided differences at the free boundaries; junction appended every
    record_every steps; the strip energy is monitored for dissipation.
    """
    new = FlowState(field=state.field.copy(), time=state.time, dt=state.dt,
                    eps_flow=state.eps_flow,
                    junction_history=list(state.junction_history),
                    upper_profile=state.upper_profile,
                    lower_profile=state.lower_profile,
                    steps_taken=state.steps_taken)
    v = new.field.values
    h = new.field.domain.h
    dt = new.dt
    e2 = new.eps_flow * new.eps_flow
    n_steps = int(math.ceil((t_end - new.time) / dt - 1e-12))
    last_energy = None
    nx, ny = v.shape[:2]
    pad = np.empty((nx + 2, ny + 2, 2))
    for k in range(1, n_steps + 1):
        pad[1:-1, 1:-1] = v
        pad[0, 1:-1] = v[0]
        pad[-1, 1:-1] = v[-1]
        pad[:, 0] = pad[:, 1]
        pad[:, -1] = pad[:, -2]
        lap = pad[2:, 1:-1]
        lap = lap + pad[:-2, 1:-1]
        lap += pad[1:-1, 2:]
        lap += pad[1:-1, :-2]
        lap -= 4.0 * v
        v = v + dt * ((e2 / (h * h)) * lap - spec.gradient(v))
        new.steps_taken += 1
        if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > blowup_radius:
            raise FlowError("flow blow-up: time step too large for this data")
        if k % record_every == 0 or k == n_steps:
            new.field.values = v
            t = new.time + k * dt
            pos = junction_position(new)
            if pos is not None:
                new.junction_history.append((t, pos))
        if k % energy_check_every == 0:
            new.field.values = v
            J, _ = energy_and_gradient(spec, new.field)
            if last_energy is not None and J > last_energy + 1e-8 * energy_check_every:
                raise FlowError("flow energy increased beyond the explicit-scheme "
                                f"tolerance ({last_energy!r} -> {J!r})")
            last_energy = J
    new.field.values = v
    new.time = new.time + n_steps * dt
    return new


def measure_speed(state: FlowState) -> tuple[float, float]:
    """Least-squares junction drift speed and fit quality r^2.

    Discards the first quarter of the samples as transient; needs at least
    20 samples after that.
    """
    hist = np.asarray(state.junction_history, dtype=float)
    if len(hist) < 4:
        raise FlowError("no junction history to fit")
    keep = hist[len(hist) // 4:]
    if len(keep) < 20:
        raise FlowError(f"only {len(keep)} junction samples after the transient; "
                        "need >= 20")
    t, x = keep[:, 0], keep[:, 1]
    slope, intercept = np.polyfit(t, x, 1)
    resid = x - (slope * t + intercept)
    ss_tot = float(np.sum((x - x.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def ode_wave_speed(spec: PotentialSpec, bracket_c=(-0.5, 0.5), *,
                   family: str = "scalar", tilt: float = 0.05,
                   offset: float = 1e-6, step: float = 1e-3,
                   x1_span: float = 60.0, tol: float = 1e-4,
                   escape_radius: float = 3.0) -> float:
    """Drag coefficient of the damped connection ODE by shooting bisection.

    Shots leave a- along its outgoing direction with the first-integral
    speed; the miss is the u1-overshoot for the axis family (the signed-u2
    miss is identically zero there by symmetry) or the signed u2 at closest
    approach for tilted off-axis shots.  For equal-depth wells the energy
    identity forces drag 0, which the bisection reproduces.
    """
    if family not in ("scalar", "upper"):
        raise ValueError(f"unknown family {family!r}")
    ang = 0.0 if family == "scalar" else tilt
    direction = np.array([math.cos(ang), math.sin(ang)])

    def miss(c: float) -> float:
        u0 = A_MINUS + offset * direction
        w0 = float(spec.value(u0))
        v0 = math.sqrt(max(2.0 * w0, 0.0)) * direction
        res = kernels.integrate_trajectory(
            spec, u0, v0, drag=c, step=step, x1_span=x1_span,
            escape_radius=escape_radius, turn_stop=(family == "scalar"))
        if family == "scalar":
            return res.overshoot
        return float(res.best_u[1])

    lo, hi = float(bracket_c[0]), float(bracket_c[1])
    m_lo = miss(lo)
    m_hi = miss(hi)
    probes = [(lo, m_lo), (hi, m_hi)]
    if np.sign(m_lo) * np.sign(m_hi) >= 0:
        raise BracketError("no sign change of the damped-shot miss on the "
                           f"bracket [{lo}, {hi}]", probes)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        m_mid = miss(mid)
        probes.append((mid, m_mid))
        if np.sign(m_mid) == np.sign(m_lo):
            lo, m_lo = mid, m_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
