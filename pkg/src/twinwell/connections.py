"""Heteroclinic connections between the two wells.

Curves joining a- = (-1, 0) and a+ = (1, 0) are computed three independent
ways: quadrature inversion for the axis ("scalar") connection, descent on the
discretized length-in-the-sqrt(2W) metric for the off-axis families (string
method with arclength redistribution), and shooting on the trajectory ODE
u'' = W_u(u) with bisection on the height u2(0).  The geometric (metric)
action and the Lagrangian action agree at equipartition, which is how paths
get their physical parametrization over x1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, make_interp_spline

from . import kernels
from .contours import directed_hausdorff, grid_crossings, hausdorff
from .potential import A_MINUS, A_PLUS, ConvexSetC0, PotentialSpec, build_C0

SQRT2 = math.sqrt(2.0)


class PathError(ValueError):
    """Invalid path input (endpoints, monotonicity, degeneracy)."""


class BracketError(RuntimeError):
    """A requested sign-change bracket does not exist; carries the probes."""

    def __init__(self, message, probes):
        super().__init__(message)
        self.probes = probes


@dataclass
class Path:
    """A discretized planar curve between the wells."""

    nodes: np.ndarray                 # (N, 2)
    param: str = "arclength"          # "arclength" | "x1-graph"
    classification: str = "upper"     # "scalar" | "upper" | "lower"
    x1: np.ndarray | None = None      # abscissae for x1-graph paths
    collapsed: bool = False

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.x1 is not None:
            self.x1 = np.asarray(self.x1, dtype=float)

    def validate(self, endpoint_tol: float = 1e-8):
        n = len(self.nodes)
        if n < 101:
            raise PathError(f"connection paths need >= 101 nodes, got {n}")
        if np.linalg.norm(self.nodes[0] - A_MINUS) > endpoint_tol:
            raise PathError("first node is not at a-")
        if np.linalg.norm(self.nodes[-1] - A_PLUS) > endpoint_tol:
            raise PathError("last node is not at a+")
        u2 = self.nodes[1:-1, 1]
        if self.classification == "scalar" and np.max(np.abs(u2)) > 1e-10:
            raise PathError("scalar path leaves the axis")
        if self.classification == "upper" and np.min(u2) < -1e-12:
            raise PathError("upper path dips below the axis")
        if self.classification == "lower" and np.max(u2) > 1e-12:
            raise PathError("lower path rises above the axis")
        if self.param == "x1-graph":
            if self.x1 is None or np.any(np.diff(self.x1) <= 0):
                raise PathError("x1-graph path needs strictly increasing abscissae")

    def mirrored(self) -> "Path":
        """Reflection across the u1 axis (u2 -> -u2)."""
        flip = {"upper": "lower", "lower": "upper", "scalar": "scalar"}
        return Path(self.nodes * np.array([1.0, -1.0]),
                    param=self.param,
                    classification=flip[self.classification],
                    x1=None if self.x1 is None else self.x1.copy(),
                    collapsed=self.collapsed)


@dataclass
class ConnectionResult:
    path: Path
    action: float
    equipartition_residual: float
    ode_residual: float
    implicit_residual: float
    min_pole_distance: float
    accepted: bool
    theta2_0: float = 0.0     # u2 where the curve crosses the u2 axis

    def summary(self) -> dict:
        return {
            "classification": self.path.classification,
            "n_nodes": int(len(self.path.nodes)),
            "action": self.action,
            "equipartition_residual": self.equipartition_residual,
            "ode_residual": self.ode_residual,
            "implicit_residual": self.implicit_residual,
            "min_pole_distance": self.min_pole_distance,
            "accepted": self.accepted,
            "theta2_0": self.theta2_0,
            "collapsed": self.path.collapsed,
        }


@dataclass
class ActionFormulas:
    """Literal transcription of the printed closed-form actions.

    Quarantined as reported-not-trusted: these are cross-checked against
    quadrature and any disagreement beyond 2% surfaces as a reconciliation
    entry, never silently adopted.
    """

    E0: float
    E_pm: float | None = None   # single-parameter family
    E_I: float | None = None    # two-parameter family, inner pair
    E_II: float | None = None   # two-parameter family, outer pair
    source: str = "closed-form"


# ---------------------------------------------------------------------------
# actions


def _nodes_of(path_or_nodes) -> np.ndarray:
    nodes = getattr(path_or_nodes, "nodes", path_or_nodes)
    return np.asarray(nodes, dtype=float)


def geometric_action(spec: PotentialSpec, path) -> float:
    """Length of the path in the sqrt(2 W) metric (midpoint rule)."""
    nodes = _nodes_of(path)
    d = np.diff(nodes, axis=0)
    seg = np.linalg.norm(d, axis=1)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    w = spec.value(mids)
    return float(np.sum(np.sqrt(2.0 * w) * seg))


def lagrangian_action(spec: PotentialSpec, path) -> float:
    """Integral of |U'|^2/2 + W(U) over the path's x1 parametrization."""
    nodes = _nodes_of(path)
    x1 = getattr(path, "x1", None)
    if x1 is None:
        raise PathError("lagrangian action needs an x1-parameterized path")
    dx = np.diff(np.asarray(x1, dtype=float))
    if np.any(dx <= 0):
        raise PathError("abscissae must be strictly increasing")
    du = np.diff(nodes, axis=0)
    speed2 = np.sum(du * du, axis=1) / (dx * dx)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    w = spec.value(mids)
    return float(np.sum((0.5 * speed2 + w) * dx))


def reparametrize_equipartition(spec: PotentialSpec, path) -> Path:
    """Assign abscissae so that |U'|^2/2 = W(U) holds segmentwise.

    dx_i = |du_i| / sqrt(2 W(mid_i)); the node nearest the u2 axis maps to
    x1 = 0.  Node values are unchanged.
    """
    nodes = _nodes_of(path)
    w_nodes = spec.value(nodes)
    # a vanishing-W node mid-path is spurious when the curve passes through
    # it (long adjacent segments); nodes easing into the pinned endpoints are
    # the normal tail behavior
    seg = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
    through = seg[:-1] + seg[1:] > 0.05
    if np.any((w_nodes[1:-1] <= 1e-14) & through):
        raise PathError("interior node with vanishing W (spurious interior minimum)")
    d = np.diff(nodes, axis=0)
    seg = np.linalg.norm(d, axis=1)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    w_mid = spec.value(mids)
    dx = seg / np.sqrt(2.0 * np.maximum(w_mid, 1e-300))
    x1 = np.concatenate([[0.0], np.cumsum(dx)])
    k0 = int(np.argmin(np.abs(nodes[:, 0])))
    x1 = x1 - x1[k0]
    return Path(nodes.copy(), param="x1-graph",
                classification=getattr(path, "classification", "upper"),
                x1=x1, collapsed=getattr(path, "collapsed", False))


def _fd_derivatives(path: Path):
    """Nonuniform 5-point first and second derivatives at nodes 2..N-3.

    Per-node stencil weights from batched Vandermonde solves (exact for
    quartics on arbitrary spacings).
    """
    x = path.x1
    u = path.nodes
    n = len(x)
    idx = np.arange(2, n - 2)
    offs = np.stack([x[idx + j] - x[idx] for j in (-2, -1, 0, 1, 2)], axis=1)
    vand = offs[:, None, :] ** np.arange(5)[None, :, None]   # (m, row=order, col=point)
    rhs = np.zeros((len(idx), 5, 2))
    rhs[:, 1, 0] = 1.0
    rhs[:, 2, 1] = 2.0
    wts = np.linalg.solve(vand, rhs)                         # (m, 5, 2)
    stack = np.stack([u[idx + j] for j in (-2, -1, 0, 1, 2)], axis=1)  # (m, 5, 2)
    d1 = np.einsum("mp,mpk->mk", wts[:, :, 0], stack)
    d2 = np.einsum("mp,mpk->mk", wts[:, :, 1], stack)
    return d1, d2


def equipartition_residual_max(spec: PotentialSpec, path: Path, exclude: int = 3) -> float:
    """max over interior nodes of | |U'|^2/2 - W(U) | (local FD derivative).

    The first and last `exclude` nodes are skipped: the exact endpoint nodes
    are snapped onto the wells, and stencils touching them see that jump.
    """
    exclude = max(exclude, 3)
    d1, _ = _fd_derivatives(path)
    sl = slice(exclude - 2, len(path.nodes) - 4 - (exclude - 2))
    up = d1[sl]
    w = spec.value(path.nodes[2:-2][sl])
    return float(np.max(np.abs(0.5 * np.sum(up * up, axis=1) - w)))


def ode_residual_max(spec: PotentialSpec, path: Path, exclude: int = 3) -> tuple[float, float]:
    """(max |U'' - W_u(U)|, max |W_u|) over interior nodes (local FD)."""
    exclude = max(exclude, 3)
    _, d2 = _fd_derivatives(path)
    sl = slice(exclude - 2, len(path.nodes) - 4 - (exclude - 2))
    grad = spec.gradient(path.nodes[2:-2][sl])
    res = float(np.max(np.linalg.norm(d2[sl] - grad, axis=1)))
    scale = float(np.max(np.linalg.norm(spec.gradient(path.nodes), axis=1)))
    return res, scale


def connection_result(spec: PotentialSpec, path: Path, theta2_0=None,
                      action=None) -> ConnectionResult:
    """Package a path with its quadrature action and diagnostics."""
    if path.param != "x1-graph":
        path = reparametrize_equipartition(spec, path)
    path.validate()
    eq = equipartition_residual_max(spec, path)
    ode, _scale = ode_residual_max(spec, path)
    imp = float(np.max(np.abs(implicit_value(spec, path.nodes))))
    dmin = float(np.min(spec.pole_distance(path.nodes)))
    if theta2_0 is None:
        theta2_0 = float(np.interp(0.0, path.x1, path.nodes[:, 1]))
    return ConnectionResult(
        path=path,
        action=geometric_action(spec, path) if action is None else float(action),
        equipartition_residual=eq,
        ode_residual=ode,
        implicit_residual=imp,
        min_pole_distance=dmin,
        accepted=bool(dmin > spec.mollify_radius),
        theta2_0=float(theta2_0),
    )


# ---------------------------------------------------------------------------
# scalar connection by quadrature


def scalar_connection(spec: PotentialSpec, N: int = 2001, *,
                      end_gap: float = 1e-9, x1_cap: float = 60.0) -> ConnectionResult:
    """Axis connection from the quadrature x1(e) = int_0^e ds / sqrt(2 W(s, 0)).

    Interior nodes sit on a uniform centered e-grid (so the sharp central
    feature of small-eps potentials stays resolved); their abscissae come from
    adaptive integration of dx/de = 1 / sqrt(2 W(e, 0)), mirrored oddly about
    e(0) = 0.  The grid stops at 1 - end_gap, or earlier when the abscissa
    would exceed x1_cap (slowly decaying tails); exact endpoint nodes at a-+
    are appended either way.
    """
    if N < 101 or N % 2 == 0:
        raise PathError("scalar connection needs an odd node count >= 101")
    probe = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, 4001)
    w_axis = spec.value(np.stack([probe, np.zeros_like(probe)], axis=1))
    if np.min(w_axis) <= 0.0:
        raise PathError("W vanishes on the open axis segment (extra axis minima)")

    def rhs(e, _x):
        return [1.0 / math.sqrt(2.0 * float(spec.value(np.array([e, 0.0]))))]

    def span_hit(_e, x):
        return x[0] - x1_cap

    span_hit.terminal = True
    sol = solve_ivp(rhs, (0.0, 1.0 - end_gap), [0.0], events=span_hit,
                    rtol=1e-12, atol=1e-14, dense_output=True, method="DOP853")
    e_max = float(sol.t_events[0][0]) if len(sol.t_events[0]) else 1.0 - end_gap

    m = N - 2
    e_half = np.linspace(0.0, e_max, (m + 1) // 2)
    x_half = sol.sol(e_half)[0]
    e_vals = np.concatenate([-e_half[:0:-1], e_half])
    xs = np.concatenate([-x_half[:0:-1], x_half])
    h = xs[-1] - xs[-2]
    x1 = np.concatenate([[xs[0] - h], xs, [xs[-1] + h]])
    nodes = np.zeros((N, 2))
    nodes[0] = A_MINUS
    nodes[-1] = A_PLUS
    nodes[1:-1, 0] = e_vals
    path = Path(nodes, param="x1-graph", classification="scalar", x1=x1)
    action = axis_action(spec)
    return connection_result(spec, path, theta2_0=0.0, action=action)


def axis_action(spec: PotentialSpec) -> float:
    """Adaptive quadrature of sqrt(2 W(s, 0)) over the axis segment."""
    from scipy.integrate import quad

    val, _err = quad(lambda s: math.sqrt(2.0 * float(spec.value(np.array([s, 0.0])))),
                     -1.0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-12)
    return float(val)


# ---------------------------------------------------------------------------
# string-method minimization of the geometric action


@dataclass
class PathMinimizeOptions:
    max_iter: int = 20000
    redistribute_every: int = 25
    stall_window: int = 50
    tol_rel: float = 1e-9
    armijo: float = 1e-4
    step0: float = 0.05
    step_grow: float = 1.3
    step_max: float = 2.0


def semicircle_path(N: int = 401, height: float = 1.0, lower: bool = False) -> Path:
    """Half-ellipse from a- to a+ with apex (0, +-height)."""
    t = np.linspace(0.0, math.pi, N)
    sgn = -1.0 if lower else 1.0
    nodes = np.stack([-np.cos(t), sgn * height * np.sin(t)], axis=1)
    return Path(nodes, classification="lower" if lower else "upper")


def upper_init(spec: PotentialSpec, N: int = 301, family: str = "outer") -> Path:
    """Standard upper-half-plane initial path for the string method.

    "outer" arcs above every pole (the only off-axis family of the
    single-parameter potential); "inner" threads between the two pole pairs
    of the two-parameter potential.
    """
    if family == "inner":
        if spec.family != "W2":
            raise PathError("inner family exists only for the two-parameter potential")
        gap = spec.eps2 - spec.eps1
        if gap <= 2.2 * spec.mollify_radius:
            raise PathError("pole gap too narrow to thread an inner path")
        height = min(max(math.sqrt(spec.eps1 * spec.eps2),
                         spec.eps1 + 0.3 * gap), spec.eps2 - 0.3 * gap)
        return semicircle_path(N, height=height)
    top = spec.eps1 if spec.family == "W1" else spec.eps2
    return semicircle_path(N, height=max(1.0, 1.45 * top))


def _action_and_grad(spec: PotentialSpec, nodes: np.ndarray):
    d = np.diff(nodes, axis=0)
    seg = np.linalg.norm(d, axis=1)
    seg_safe = np.maximum(seg, 1e-300)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    w, gw = spec.value_and_gradient(mids)
    g = np.sqrt(2.0 * w)
    action = float(np.sum(g * seg))
    # d(sqrt(2W))/du at midpoints; bounded near the wells since grad W ~ H (u-a)
    gg = gw / np.maximum(g, 1e-300)[:, None]
    t = d / seg_safe[:, None]
    grad = np.zeros_like(nodes)
    grad[1:] += 0.5 * gg * seg[:, None] + g[:, None] * t
    grad[:-1] += 0.5 * gg * seg[:, None] - g[:, None] * t
    grad[0] = 0.0
    grad[-1] = 0.0
    return action, grad


def _redistribute(nodes: np.ndarray) -> np.ndarray:
    """Resample to uniform arclength with a cubic spline (endpoints fixed)."""
    seg = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total <= 0:
        return nodes.copy()
    keep = np.concatenate([[True], np.diff(s) > 1e-14 * total])
    sp = CubicSpline(s[keep] / total, nodes[keep], axis=0)
    out = sp(np.linspace(0.0, 1.0, len(nodes)))
    out[0] = nodes[0]
    out[-1] = nodes[-1]
    return out


def minimize_path(spec: PotentialSpec, init, opts: PathMinimizeOptions | None = None
                  ) -> ConnectionResult:
    """Descend the discretized geometric action with pinned endpoints.

    Gradient steps with Armijo backtracking (trial step seeded by the
    Barzilai-Borwein estimate, so descent stays monotone); nodes redistributed
    to uniform arclength every opts.redistribute_every iterations; stops when
    the relative action decrease over opts.stall_window iterations drops below
    opts.tol_rel.  A path that slides onto the axis is returned as scalar with
    the collapsed flag; approach into a pole's mollification zone is an error.
    """
    opts = opts or PathMinimizeOptions()
    nodes = _nodes_of(init).copy()
    if np.linalg.norm(nodes[0] - A_MINUS) > 1e-8 or np.linalg.norm(nodes[-1] - A_PLUS) > 1e-8:
        raise PathError("initial path endpoints must sit at the wells")
    nodes[0] = A_MINUS
    nodes[-1] = A_PLUS
    if float(np.min(spec.pole_distance(nodes))) <= spec.mollify_radius:
        raise PathError("initial path enters a mollification zone")

    alpha = opts.step0
    history = []
    action, grad = _action_and_grad(spec, nodes)
    prev_nodes = prev_grad = None
    for it in range(1, opts.max_iter + 1):
        if prev_nodes is not None:
            s = nodes - prev_nodes
            y = grad - prev_grad
            sy = float(np.sum(s * y))
            if sy > 0:
                alpha = min(max(float(np.sum(s * s)) / sy, 1e-8), opts.step_max)
        gnorm2 = float(np.sum(grad * grad))
        accepted = False
        a = alpha
        while a > 1e-18:
            trial = nodes - a * grad
            s_trial, g_trial = _action_and_grad(spec, trial)
            if s_trial <= action - opts.armijo * a * gnorm2:
                accepted = True
                break
            a *= 0.5
        if not accepted:
            break
        prev_nodes, prev_grad = nodes, grad
        nodes, action, grad = trial, s_trial, g_trial
        if float(np.min(spec.pole_distance(nodes))) <= spec.mollify_radius:
            raise PathError("path entered a mollification zone during descent")
        if it % opts.redistribute_every == 0:
            nodes = _redistribute(nodes)
            action, grad = _action_and_grad(spec, nodes)
            prev_nodes = prev_grad = None
        history.append(action)
        if len(history) > opts.stall_window:
            drop = history[-opts.stall_window - 1] - history[-1]
            if drop < opts.tol_rel * max(abs(history[-1]), 1e-30):
                break

    collapsed = bool(np.max(np.abs(nodes[:, 1])) < 1e-10)
    if collapsed:
        cls = "scalar"
        nodes[:, 1] = 0.0
    else:
        cls = "upper" if float(np.mean(nodes[:, 1])) >= 0.0 else "lower"
    path = Path(nodes, param="arclength", classification=cls, collapsed=collapsed)
    return connection_result(spec, path)


# ---------------------------------------------------------------------------
# shooting


def shoot_connections(spec: PotentialSpec, u2_range=(0.0, 2.4), n_scan: int = 400, *,
                      c0: ConvexSetC0 | None = None, step: float = 1e-3,
                      x1_span: float = 40.0, bisect_iters: int = 40,
                      record_every: int = 2, scalar_N: int = 2001,
                      include_scalar: bool = True,
                      root_tol: float = 0.05) -> list[ConnectionResult]:
    """Enumerate connections by bisection on the shooting height c = u2(0).

    Shots start at (0, c) with speed sqrt(2 W(0, c)) along +u1 (first
    integral, rightward branch).  The miss function is the u1-overshoot (the
    largest u1 reached minus 1): shots below a connection turn back before
    the well and retreat along the axis, shots above it pass beyond, so the
    sign flips exactly at a root.  Scan points that enter a pole's
    mollification zone before reaching the wells region (max u1 < 0.5) carry
    no usable miss and are excluded from brackets; a later zone entry (the
    post-turn dive toward a pole) leaves the overshoot datum intact.  Each
    positive root contributes the upper path and its mirror; c = 0 is the
    scalar member, computed by axis quadrature.
    """
    if c0 is None:
        c0 = build_C0(spec)
    lo = max(float(u2_range[0]), 0.0)
    hi = min(float(u2_range[1]), 0.98 * c0.radius)
    if hi <= lo:
        raise PathError("empty shooting range inside the bounding disk")
    cs = np.linspace(lo, hi, n_scan)
    kw = dict(step=step, x1_span=x1_span, escape_radius=c0.radius)

    # pass A: first-passage overshoot bisection (connections approaching the
    # well from the west, where u1 is monotone up to the closest approach)
    codes, miss, dist = kernels.scan_miss(spec, cs, turn_stop=True, **kw)
    valid = (codes != 2) | (miss > -0.5)
    roots = []
    for i in range(n_scan - 1):
        if not (valid[i] and valid[i + 1]) or cs[i + 1] <= 1e-12:
            continue
        if np.sign(miss[i]) * np.sign(miss[i + 1]) < 0:
            a, b = cs[i], cs[i + 1]
            ma = miss[i]
            aborted = False
            for _ in range(bisect_iters):
                mid = 0.5 * (a + b)
                res = kernels.shoot_vertical(spec, mid, **kw)
                if res.flagged and res.overshoot <= -0.5:
                    aborted = True
                    break
                if np.sign(res.overshoot) == np.sign(ma):
                    a, ma = mid, res.overshoot
                else:
                    b = mid
            if not aborted:
                roots.append(0.5 * (a + b))

    # pass B: grazing connections (approach from the north-east after an
    # excursion past u1 = 1) show up as sharp local minima of the free-run
    # closest-approach distance; refine those by golden-section search
    codes_b, _miss_b, dist_b = kernels.scan_miss(spec, cs, turn_stop=False, **kw)
    spacing = cs[1] - cs[0]
    gold = 0.5 * (math.sqrt(5.0) - 1.0)

    def free_dist(c):
        return kernels.shoot_vertical(spec, float(c), turn_stop=False, **kw).best_dist

    for i in range(1, n_scan - 1):
        if codes_b[i] == 2 or dist_b[i] > 0.6:
            continue
        if not (dist_b[i] <= dist_b[i - 1] and dist_b[i] <= dist_b[i + 1]):
            continue
        if any(abs(cs[i] - r) < 2.5 * spacing for r in roots):
            continue
        a, b = cs[i - 1], cs[i + 1]
        x1g = b - gold * (b - a)
        x2g = a + gold * (b - a)
        f1, f2 = free_dist(x1g), free_dist(x2g)
        for _ in range(60):
            if f1 < f2:
                b, x2g, f2 = x2g, x1g, f1
                x1g = b - gold * (b - a)
                f1 = free_dist(x1g)
            else:
                a, x1g, f1 = x1g, x2g, f2
                x2g = a + gold * (b - a)
                f2 = free_dist(x2g)
        c_star = 0.5 * (a + b)
        if free_dist(c_star) <= root_tol:
            roots.append(c_star)

    results = []
    if include_scalar:
        results.append(scalar_connection(spec, scalar_N))
    ext = record_every * step
    dedup = []
    for c in sorted(roots):
        if dedup and abs(c - dedup[-1]) < 1e-3:
            continue
        dedup.append(c)
    for c in dedup:
        res = kernels.shoot_vertical(spec, c, turn_stop=False,
                                     record_every=record_every, **kw)
        if res.best_dist > root_tol or res.best_x1 < 1.0:
            continue
        m = int(np.searchsorted(res.x1, res.best_x1))
        xf = np.concatenate([res.x1[:m], [res.best_x1]])
        uf = np.vstack([res.u[:m], res.best_u])
        xb = -xf[1:][::-1]
        ub = uf[1:][::-1] * np.array([-1.0, 1.0])
        x1 = np.concatenate([[xb[0] - ext], xb, xf, [xf[-1] + ext]])
        nodes = np.vstack([A_MINUS, ub, uf, A_PLUS])
        path = Path(nodes, param="x1-graph", classification="upper", x1=x1)
        upper = connection_result(spec, path, theta2_0=c)
        results.append(upper)
        results.append(connection_result(spec, upper.path.mirrored(), theta2_0=-c))
    results.sort(key=lambda r: r.theta2_0)
    return results


# ---------------------------------------------------------------------------
# closed-form actions and crossings


def closed_form_actions(spec: PotentialSpec) -> ActionFormulas:
    """Literal transcription of the printed action formulas (reported only)."""
    if spec.family == "W1":
        e = spec.eps1
        if not (1e-12 < e < 1e6):
            raise ValueError("eps out of the formula's regular range")
        k = (1.0 + e * e) / e
        return ActionFormulas(
            E0=(k * (math.pi - math.atan(e)) - e) / SQRT2,
            E_pm=(2.0 + 2.0 * k * math.atan(e)) / SQRT2,
        )
    e1, e2 = spec.eps1, spec.eps2
    d = e2 * e2 - e1 * e1
    if e1 < 1e-12:
        raise ValueError("singular limit eps1 -> 0")
    if d < 1e-12:
        raise ValueError("singular limit eps2 -> eps1")
    a = (e1 * e1 + 1.0) ** 2 / (e1 * d)
    b = (e2 * e2 + 1.0) ** 2 / (e2 * d)
    at1, at2 = math.atan(e1), math.atan(e2)
    return ActionFormulas(
        E0=abs(2.0 - a * at1 + b * at2 - b * math.pi / 2.0 + a * math.pi / 2.0) / SQRT2,
        E_I=abs(2.0 - b * at2 + a * at1 + b * math.pi / 2.0) / SQRT2,
        E_II=abs(2.0 + b * at2 - a * at1) / SQRT2,
    )


@dataclass
class CrossingResult:
    root: float
    gap_at_root: float
    probes: list            # (parameter, action_a, action_b) tuples
    mode: str
    source: str
    bracket: tuple


@dataclass
class QuadratureOptions:
    path_N: int = 301
    scalar_N: int = 1001
    minimize: PathMinimizeOptions = field(default_factory=PathMinimizeOptions)


def _w1_gap_closed(eps: float) -> tuple[float, float, float]:
    f = closed_form_actions(PotentialSpec("W1", eps))
    return f.E_pm - f.E0, f.E_pm, f.E0


def _w1_gap_quadrature(make_spec, eps: float, qopts: QuadratureOptions):
    spec = make_spec(eps)
    e0 = scalar_connection(spec, qopts.scalar_N)
    ep = minimize_path(spec, upper_init(spec, qopts.path_N), qopts.minimize)
    return ep.action - e0.action, ep.action, e0.action


def family_of(spec: PotentialSpec, result: ConnectionResult) -> str:
    """inner/outer family label of an off-axis connection by its apex height."""
    if spec.family != "W2":
        return "offaxis"
    c = abs(result.theta2_0)
    return "inner" if c < spec.eps2 else "outer"


def w2_pair_actions(spec: PotentialSpec, qopts: QuadratureOptions | None = None
                    ) -> tuple[ConnectionResult, ConnectionResult]:
    """Quadrature (inner, outer) upper connections of the two-parameter family.

    Inits: half-ellipses with apexes between the pole pairs and above both.
    """
    qopts = qopts or QuadratureOptions()
    inner = minimize_path(spec, upper_init(spec, qopts.path_N, "inner"), qopts.minimize)
    outer = minimize_path(spec, upper_init(spec, qopts.path_N, "outer"), qopts.minimize)
    if family_of(spec, inner) != "inner" or family_of(spec, outer) != "outer":
        raise PathError("minimization did not separate the two families; "
                        "adjust the initial apex heights")
    return inner, outer


def _w2_gap_quadrature(make_spec, eps2: float, qopts: QuadratureOptions):
    spec = make_spec(eps2)
    inner, outer = w2_pair_actions(spec, qopts)
    return inner.action - outer.action, inner.action, outer.action


def _w2_gap_closed(make_spec, eps2: float):
    f = closed_form_actions(make_spec(eps2))
    return f.E_I - f.E_II, f.E_I, f.E_II


def find_crossing(make_spec, bracket, mode: str, source: str = "quadrature", *,
                  tol: float = 1e-4, qopts: QuadratureOptions | None = None
                  ) -> CrossingResult:
    """Bisection for the equal-action parameter.

    mode "eps_star": root of E(off-axis) - E(axis) over the family parameter.
    mode "sigma_star": root of E(inner) - E(outer) over the outer pole height.
    make_spec maps the scanned parameter to a PotentialSpec.  The bisection
    runs until the bracket is shorter than tol; all probes are returned.
    """
    if mode not in ("eps_star", "sigma_star"):
        raise ValueError(f"unknown crossing mode {mode!r}")
    if source not in ("closed-form", "quadrature"):
        raise ValueError(f"unknown source {source!r}")
    qopts = qopts or QuadratureOptions()

    def gap(p: float):
        if mode == "eps_star":
            if source == "closed-form":
                return _w1_gap_closed(p)
            return _w1_gap_quadrature(make_spec, p, qopts)
        if source == "closed-form":
            return _w2_gap_closed(make_spec, p)
        return _w2_gap_quadrature(make_spec, p, qopts)

    lo, hi = float(bracket[0]), float(bracket[1])
    probes = []
    g_lo, a, b = gap(lo)
    probes.append((lo, a, b))
    g_hi, a, b = gap(hi)
    probes.append((hi, a, b))
    if np.sign(g_lo) * np.sign(g_hi) >= 0:
        raise BracketError(
            f"no sign change of the action gap on [{lo}, {hi}]", probes)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid, a, b = gap(mid)
        probes.append((mid, a, b))
        if np.sign(g_mid) == np.sign(g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    g_root, a, b = gap(root)
    probes.append((root, a, b))
    return CrossingResult(root=root, gap_at_root=g_root, probes=probes,
                          mode=mode, source=source, bracket=(lo, hi))


# ---------------------------------------------------------------------------
# implicit trajectory equation and geometry diagnostics


def implicit_value(spec: PotentialSpec, pts) -> np.ndarray:
    """First integral of the trajectory ODE (zero along connections).

    This is Im G(z) for the antiderivative G of the holomorphic factor; it
    vanishes identically on the axis and on every off-axis connection.
    """
    pts = np.asarray(pts, dtype=float)
    u1 = pts[..., 0]
    u2 = pts[..., 1]

    def log_ratio(e):
        num = (u2 - e) ** 2 + u1 * u1
        den = (u2 + e) ** 2 + u1 * u1
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(num / den)

    if spec.family == "W1":
        e = spec.eps1
        return u2 + (1.0 + e * e) / (4.0 * e) * log_ratio(e)
    e1, e2 = spec.eps1, spec.eps2
    d = e2 * e2 - e1 * e1
    k1 = (e1 * e1 + 1.0) ** 2 / (4.0 * e1 * d)
    k2 = (e2 * e2 + 1.0) ** 2 / (4.0 * e2 * d)
    return u2 - k1 * log_ratio(e1) + k2 * log_ratio(e2)


def implicit_curve(spec: PotentialSpec, window=1.5, n: int = 801,
                   half: str = "upper", u2_min: float = 1e-3,
                   refine_iters: int = 40) -> np.ndarray:
    """Off-axis zero set of the implicit trajectory equation (sample points)."""
    if half == "upper":
        ylim = (u2_min, window)
    elif half == "lower":
        ylim = (-window, -u2_min)
    else:
        ylim = (-window, window)
    return grid_crossings(lambda q: implicit_value(spec, q),
                          (-window, window), ylim, n=n, refine_iters=refine_iters)


@dataclass
class ImplicitReport:
    max_residual: float       # max |implicit_value| over the path nodes
    hausdorff_to_curve: float  # max over path nodes of distance to the zero set
    n_curve_points: int
    reconcile: bool            # True when the distance exceeds 0.05


def implicit_residual(spec: PotentialSpec, path) -> ImplicitReport:
    nodes = _nodes_of(path)
    vals = implicit_value(spec, nodes)
    half = "upper" if float(np.mean(nodes[:, 1])) >= 0 else "lower"
    curve = implicit_curve(spec, half=half)
    dist = directed_hausdorff(nodes, curve) if len(curve) else math.inf
    return ImplicitReport(
        max_residual=float(np.max(np.abs(vals))),
        hausdorff_to_curve=float(dist),
        n_curve_points=int(len(curve)),
        reconcile=bool(dist > 0.05),
    )


@dataclass
class GeometryReport:
    convex: bool
    min_turn: float             # most concave normalized cross product
    circle_deviation: float     # max | |u| - 1 | over both paths
    envelope_deviation: float   # max distance to u1^2 = u2^2/3 + 1
    min_pole_distance: float
    mirror_hausdorff: float     # Hausdorff(upper, T2(lower))


def geometry_report(upper, lower, spec: PotentialSpec) -> GeometryReport:
    """Convexity and limit-shape diagnostics of the region bounded by e+-."""
    un = _nodes_of(upper)
    ln = _nodes_of(lower)
    if np.min(un[1:-1, 1]) < -1e-9 or np.max(ln[1:-1, 1]) > 1e-9:
        raise PathError("paths cross the axis; region is not simple")
    poly = np.vstack([un, ln[::-1][1:-1]])
    e = np.roll(poly, -1, axis=0) - poly
    elen = np.maximum(np.linalg.norm(e, axis=1), 1e-300)
    nxt = np.roll(e, -1, axis=0)
    cross = (e[:, 0] * nxt[:, 1] - e[:, 1] * nxt[:, 0]) / (elen * np.roll(elen, -1))
    area = 0.5 * float(np.sum(poly[:, 0] * np.roll(poly[:, 1], -1)
                              - poly[:, 1] * np.roll(poly[:, 0], -1)))
    if area < 0:
        cross = -cross
    min_turn = float(np.min(cross))

    both = np.vstack([un, ln])
    circle_dev = float(np.max(np.abs(np.linalg.norm(both, axis=1) - 1.0)))
    t = np.linspace(-3.0, 3.0, 1201)
    env_x = np.sqrt(t * t / 3.0 + 1.0)
    env = np.vstack([np.stack([env_x, t], axis=1), np.stack([-env_x, t], axis=1)])
    env_dev = directed_hausdorff(both, env)
    mirror = ln * np.array([1.0, -1.0])
    return GeometryReport(
        convex=bool(min_turn >= -1e-8),
        min_turn=min_turn,
        circle_deviation=circle_dev,
        envelope_deviation=float(env_dev),
        min_pole_distance=float(np.min(spec.pole_distance(both))),
        mirror_hausdorff=float(hausdorff(un, mirror)),
    )


def profile_on_grid(path: Path, x1_grid: np.ndarray) -> np.ndarray:
    """Sample an x1-parameterized path on a grid, clamping to the endpoints."""
    if path.x1 is None:
        raise PathError("profile sampling needs an x1-parameterized path")
    out = np.empty((len(x1_grid), 2))
    for k in range(2):
        out[:, k] = np.interp(x1_grid, path.x1, path.nodes[:, k],
                              left=path.nodes[0, k], right=path.nodes[-1, k])
    return out
