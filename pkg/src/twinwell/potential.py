"""Symmetric two-well potentials on the plane and their symmetry data.

The two families are rational two-well potentials built from a holomorphic
factor F(z) of z = u1 + i*u2:

    W1: F(z) = (z^2 - 1) / (z^2 + eps^2)
    W2: F(z) = (z^2 - 1)^2 / ((z^2 + eps1^2) (z^2 + eps2^2))

with W = |F(z)|^2.  Both vanish exactly at a+- = (+-1, 0), are invariant
under the four-element reflection group generated by u1 -> -u1 and
u2 -> -u2, and blow up at the purely imaginary poles (0, +-eps_k).  A smooth
cap saturates the value near the poles at ``cap_value`` while leaving the
potential bitwise unchanged wherever W <= cap_value/10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

A_PLUS = np.array([1.0, 0.0])
A_MINUS = np.array([-1.0, 0.0])

_SQRT6 = math.sqrt(6.0)


class PotentialError(ValueError):
    """Invalid potential specification or invalid evaluation input."""


def w2_critical_eps1() -> float:
    """Closed-form critical inner parameter of the W2 family."""
    w = (_SQRT6 - 1.0) / 2.0
    return math.sqrt(w) - w


@dataclass(frozen=True)
class DihedralElement:
    """One element of the four-element axis-reflection group."""

    tag: str
    matrix: np.ndarray

    def apply(self, u: np.ndarray) -> np.ndarray:
        return u @ self.matrix.T


IDENTITY = DihedralElement("identity", np.eye(2))
T1 = DihedralElement("T1", np.diag([-1.0, 1.0]))
T2 = DihedralElement("T2", np.diag([1.0, -1.0]))
S = DihedralElement("S", np.diag([-1.0, -1.0]))

GROUP: tuple[DihedralElement, ...] = (IDENTITY, T1, T2, S)


def group_table_closed() -> bool:
    """Check closure of the group: every product is again a group element."""
    mats = [g.matrix for g in GROUP]
    for a in mats:
        for b in mats:
            prod = a @ b
            if not any(np.array_equal(prod, m) for m in mats):
                return False
    return True


@dataclass(frozen=True)
class PotentialSpec:
    """A capped two-well potential.

    family        "W1" or "W2"
    eps1          pole height (the only parameter of W1)
    eps2          second pole height, W2 only (eps1 <= eps2)
    mollify_radius  declared radius around each pole inside which the cap may
                  act; diagnostics treat points closer than this as unreliable
    cap_value     saturation level of the capped potential
    """

    family: str
    eps1: float
    eps2: float | None = None
    mollify_radius: float = 0.07
    cap_value: float = 1e6

    def __post_init__(self):
        if self.family not in ("W1", "W2"):
            raise PotentialError(f"unknown family {self.family!r}")
        if not (self.eps1 > 0 and math.isfinite(self.eps1)):
            raise PotentialError("eps must be a positive finite number")
        if self.family == "W1":
            if self.eps2 is not None:
                raise PotentialError("W1 takes a single eps parameter")
        else:
            if self.eps2 is None or not (0 < self.eps1 <= self.eps2):
                raise PotentialError("W2 requires 0 < eps1 <= eps2")
        if self.mollify_radius < 0:
            raise PotentialError("mollify_radius must be >= 0")
        if not (self.cap_value > 0):
            raise PotentialError("cap_value must be positive")

    # -- structure ---------------------------------------------------------

    @property
    def group_elements(self) -> tuple[DihedralElement, ...]:
        return GROUP

    @property
    def cap_threshold(self) -> float:
        """Below this value the cap is exactly the identity."""
        return self.cap_value / 10.0

    def poles(self) -> np.ndarray:
        """Pole locations (0, +-eps_k) as an (m, 2) array."""
        heights = [self.eps1] if self.family == "W1" else [self.eps1, self.eps2]
        pts = []
        for e in heights:
            pts.append([0.0, e])
            pts.append([0.0, -e])
        return np.array(pts)

    def pole_distance(self, u: np.ndarray) -> np.ndarray:
        """Distance from point(s) u to the nearest pole."""
        u = np.asarray(u, dtype=float)
        poles = self.poles()
        d = np.linalg.norm(u[..., None, :] - poles, axis=-1)
        return d.min(axis=-1)

    def kernel_params(self) -> tuple[int, float, float, float]:
        """(n_factors, eps1^2, eps2^2, cap) for the trajectory kernels."""
        e2sq = 0.0 if self.eps2 is None else self.eps2 * self.eps2
        n = 1 if self.family == "W1" else 2
        return (n, self.eps1 * self.eps1, e2sq, self.cap_value)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        d: dict = {"family": self.family}
        if self.family == "W1":
            d["eps"] = self.eps1
        else:
            d["eps1"] = self.eps1
            d["eps2"] = self.eps2
        d["mollify_radius"] = self.mollify_radius
        d["cap_value"] = self.cap_value
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PotentialSpec":
        d = dict(d)
        family = d.pop("family", None)
        if family == "W1":
            eps1 = d.pop("eps", None)
            eps2 = None
        elif family == "W2":
            eps1 = d.pop("eps1", None)
            eps2 = d.pop("eps2", None)
            if eps1 == "critical":
                eps1 = w2_critical_eps1()
        else:
            raise PotentialError(f"unknown family {family!r}")
        kwargs = {}
        for key in ("mollify_radius", "cap_value"):
            if key in d:
                kwargs[key] = d.pop(key)
        if d:
            raise PotentialError(f"unknown potential keys {sorted(d)}")
        if eps1 is None:
            raise PotentialError("missing eps parameter")
        return cls(family, float(eps1), None if eps2 is None else float(eps2), **kwargs)

    # -- evaluation --------------------------------------------------------

    def _factor(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Holomorphic factor F and its derivative F' at complex z."""
        z2 = z * z
        if self.family == "W1":
            e2 = self.eps1 * self.eps1
            den = z2 + e2
            f = (z2 - 1.0) / den
            fp = 2.0 * z * (1.0 + e2) / (den * den)
            return f, fp
        e1, e2 = self.eps1 * self.eps1, self.eps2 * self.eps2
        den1 = z2 + e1
        den2 = z2 + e2
        f1 = (z2 - 1.0) / den1
        f2 = (z2 - 1.0) / den2
        f1p = 2.0 * z * (1.0 + e1) / (den1 * den1)
        f2p = 2.0 * z * (1.0 + e2) / (den2 * den2)
        return f1 * f2, f1p * f2 + f1 * f2p

    def _cap(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Capped value and the chain-rule factor d(capped)/dW.

        Identity below cap_value/10, then a tanh saturation toward cap_value;
        C^2-matched at the threshold, monotone, symmetric-in-W by construction.
        """
        t = self.cap_threshold
        amp = self.cap_value - t
        w = np.asarray(w)
        excess = np.where(w > t, w - t, 0.0)
        th = np.tanh(excess / amp)
        wt = np.where(w <= t, w, t + amp * th)
        fac = np.where(w <= t, 1.0, 1.0 - th * th)
        bad = ~np.isfinite(w)
        if np.any(bad):
            wt = np.where(bad, self.cap_value, wt)
            fac = np.where(bad, 0.0, fac)
        return wt, fac

    def value(self, u: np.ndarray) -> np.ndarray:
        """Capped potential at point(s) u, shape (..., 2) -> (...)."""
        u = np.asarray(u, dtype=float)
        z = u[..., 0] + 1j * u[..., 1]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            f, _ = self._factor(z)
            w = f.real * f.real + f.imag * f.imag
        wt, _ = self._cap(w)
        return wt

    def value_and_gradient(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Capped value and its exact gradient, shapes (...,), (..., 2)."""
        u = np.asarray(u, dtype=float)
        z = u[..., 0] + 1j * u[..., 1]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            f, fp = self._factor(z)
            w = f.real * f.real + f.imag * f.imag
            p = fp * np.conj(f)
        wt, fac = self._cap(w)
        grad = np.empty(u.shape, dtype=float)
        with np.errstate(invalid="ignore"):
            grad[..., 0] = 2.0 * fac * p.real
            grad[..., 1] = -2.0 * fac * p.imag
        grad[~np.isfinite(grad)] = 0.0
        return wt, grad

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return self.value_and_gradient(u)[1]


@dataclass
class MinimaInfo:
    """Refined minima plus the measured local convexity data."""

    a_plus: np.ndarray
    a_minus: np.ndarray
    hess_eigs: tuple[float, float]
    c: float
    r0: float
    degenerate: bool = False


@dataclass
class ConvexSetC0:
    """Symmetric bounding disk for the solution values.

    The growth comparison between the boundary circle and an outer ring is
    recorded but does not veto acceptance: for these rational families the
    boundary maximum (at +-i*rho) always exceeds the far-field limit 1, so a
    literal ring test fails for every radius while the containment checks are
    the operative ones.
    """

    radius: float
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    margin: float = 0.0
    growth_ok: bool = False
    boundary_max: float = 0.0
    ring_min: float = 0.0

    def contains(self, u: np.ndarray, margin: float = 0.0) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.linalg.norm(u - self.center, axis=-1) <= self.radius - margin

    def project(self, u: np.ndarray) -> np.ndarray:
        """Radial projection onto the disk (identity inside)."""
        u = np.asarray(u, dtype=float)
        r = np.linalg.norm(u, axis=-1)
        scale = np.where(r > self.radius, self.radius / np.maximum(r, 1e-300), 1.0)
        return u * scale[..., None]


@dataclass
class QMonotonicityReport:
    violations: np.ndarray          # sampled points where W_u . Q_u < -1e-10
    fraction: float
    n_effective: int
    worst: float                    # most negative sampled dot product


def evaluate(spec: PotentialSpec, u) -> tuple[float, np.ndarray]:
    """Value and gradient at a single point; rejects non-finite input."""
    u = np.asarray(u, dtype=float)
    if u.shape != (2,) or not np.all(np.isfinite(u)):
        raise PotentialError(f"invalid evaluation point {u!r}")
    w, g = spec.value_and_gradient(u)
    return float(w), g


def hessian(spec: PotentialSpec, u, step: float = 1e-5) -> np.ndarray:
    """Symmetrized central finite difference of the analytic gradient.

    Unreliable inside the mollification zone around a pole; callers that may
    probe there should check pole_distance first (near_pole_flagged helper).
    """
    u = np.asarray(u, dtype=float)
    h = np.zeros((2, 2))
    for k in range(2):
        dp = np.zeros(2)
        dp[k] = step
        gp = spec.gradient(u + dp)
        gm = spec.gradient(u - dp)
        h[:, k] = (gp - gm) / (2.0 * step)
    return 0.5 * (h + h.T)


def near_pole_flagged(spec: PotentialSpec, u) -> bool:
    """True when u is inside the declared mollification zone of a pole."""
    return bool(spec.pole_distance(np.asarray(u, dtype=float)) <= spec.mollify_radius)


def _sample_box(n: int, lo: float, hi: float, seed: int) -> np.ndarray:
    """Seeded quasi-random points in [lo, hi]^2."""
    from scipy.stats import qmc

    eng = qmc.Sobol(d=2, scramble=True, seed=seed)
    pts = eng.random_base2(max(1, math.ceil(math.log2(n))))[:n]
    return lo + (hi - lo) * pts


def check_symmetry(spec, n_samples: int = 1000, seed: int = 0) -> float:
    """Max of |W(g u) - W(u)| over group elements and sampled points.

    Accepts anything exposing .value(points) and .group_elements, so a broken
    stand-in can serve as a negative control for the harness.
    """
    if n_samples < 100:
        raise PotentialError("n_samples must be >= 100")
    pts = _sample_box(n_samples, -3.0, 3.0, seed)
    w0 = np.asarray(spec.value(pts))
    worst = 0.0
    for g in spec.group_elements:
        if g.tag == "identity":
            continue
        wg = np.asarray(spec.value(g.apply(pts)))
        finite = np.isfinite(w0) & np.isfinite(wg)
        if np.any(finite):
            worst = max(worst, float(np.max(np.abs(wg[finite] - w0[finite]))))
    return worst


def hessian_batch(spec: PotentialSpec, pts: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Vectorized FD-of-gradient Hessians, shape (n, 2, 2), symmetrized."""
    pts = np.asarray(pts, dtype=float)
    h = np.empty(pts.shape[:-1] + (2, 2))
    for k in range(2):
        dp = np.zeros(2)
        dp[k] = step
        h[..., :, k] = (spec.gradient(pts + dp) - spec.gradient(pts - dp)) / (2 * step)
    return 0.5 * (h + np.swapaxes(h, -1, -2))


def _min_eig_scan(spec: PotentialSpec, center: np.ndarray, radius: float,
                  n_r: int = 64, n_t: int = 64) -> float:
    """Minimum Hessian eigenvalue over a polar grid on the closed ball."""
    rr = np.linspace(radius / n_r, radius, n_r)
    tt = np.linspace(0.0, 2.0 * math.pi, n_t, endpoint=False)
    rg, tg = np.meshgrid(rr, tt, indexing="ij")
    pts = center + np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1).reshape(-1, 2)
    h = hessian_batch(spec, pts)
    tr = h[:, 0, 0] + h[:, 1, 1]
    det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
    disc = np.maximum(tr * tr / 4.0 - det, 0.0)
    return float(np.min(tr / 2.0 - np.sqrt(disc)))


def minima_and_convexity(spec: PotentialSpec, radii=(0.5, 0.4, 0.3, 0.2, 0.1)) -> MinimaInfo:
    """Newton-refine the minima from (+-1, 0) and scan for a convexity ball.

    c^2 is the smallest sampled Hessian eigenvalue over the ball of radius r0
    about a+, with r0 the largest scanned radius keeping that minimum positive.
    """
    def refine(x0: np.ndarray) -> np.ndarray:
        x = x0.copy()
        for _ in range(60):
            g = spec.gradient(x)
            if np.linalg.norm(g) < 1e-14:
                break
            h = hessian(spec, x)
            try:
                dx = np.linalg.solve(h, g)
            except np.linalg.LinAlgError:
                dx = g
            if not np.all(np.isfinite(dx)) or np.linalg.norm(dx) > 0.5:
                raise PotentialError("Newton refinement diverged")
            x = x - dx
        if np.linalg.norm(spec.gradient(x)) > 1e-10 or np.linalg.norm(x - x0) > 0.1:
            raise PotentialError("Newton refinement did not converge near (+-1, 0)")
        return x

    a_plus = refine(A_PLUS.copy())
    a_minus = refine(A_MINUS.copy())
    h = hessian(spec, a_plus)
    eigs = np.linalg.eigvalsh(h)
    c = 0.0
    r0 = 0.0
    for radius in radii:
        m = _min_eig_scan(spec, a_plus, radius)
        if m > 0.0:
            c = math.sqrt(m)
            r0 = radius
            break
    if r0 == 0.0:
        raise PotentialError("no scanned radius gives a positive Hessian bound")
    return MinimaInfo(
        a_plus=a_plus,
        a_minus=a_minus,
        hess_eigs=(float(eigs[0]), float(eigs[1])),
        c=c,
        r0=r0,
        degenerate=bool(eigs[0] < 1e-3),
    )


def build_C0(spec: PotentialSpec, connections=(), radii=(2.0, 2.5, 3.0, 4.0),
             margin: float = 0.2, n_boundary: int = 720) -> ConvexSetC0:
    """Smallest disk from the radius grid containing a+- and the connections.

    Containment margin >= ``margin`` decides acceptance.  The ring-vs-boundary
    growth sampling (outer ring at twice the radius) is recorded on the result.
    """
    pts = [A_PLUS, A_MINUS]
    for conn in connections:
        nodes = getattr(conn, "nodes", None)
        if nodes is None:
            nodes = getattr(getattr(conn, "path", conn), "nodes", conn)
        pts.append(np.asarray(nodes, dtype=float).reshape(-1, 2))
    allpts = np.vstack([np.atleast_2d(p) for p in pts])
    reach = float(np.max(np.linalg.norm(allpts, axis=1)))

    angles = np.linspace(0.0, 2.0 * math.pi, n_boundary, endpoint=False)
    ring_dir = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    for radius in radii:
        if radius - reach < margin:
            continue
        wb = spec.value(radius * ring_dir)
        wr = spec.value(2.0 * radius * ring_dir)
        boundary_max = float(np.max(wb))
        ring_min = float(np.min(wr))
        return ConvexSetC0(
            radius=radius,
            margin=radius - reach,
            growth_ok=bool(ring_min >= boundary_max),
            boundary_max=boundary_max,
            ring_min=ring_min,
        )
    raise PotentialError(
        f"no disk radius in {radii} contains the inputs with margin {margin}"
        f" (farthest point at |u| = {reach:.4f})"
    )


def check_Q_monotonicity(spec: PotentialSpec, q_candidate: str = "radial",
                         n_samples: int = 10_000, seed: int = 0,
                         q_grad=None) -> QMonotonicityReport:
    """Sample W_u . Q_u over the open right half-plane.

    The radial candidate is Q(u) = |u - a+|.  A custom convex Q enters through
    ``q_grad`` mapping points (n, 2) to gradient vectors (n, 2).  Violations
    (dot < -1e-10) are results, not errors.
    """
    if q_candidate not in ("radial", "custom"):
        raise PotentialError(f"unknown Q candidate {q_candidate!r}")
    if q_candidate == "custom" and q_grad is None:
        raise PotentialError("custom Q requires q_grad")
    pts = _sample_box(2 * n_samples, -3.0, 3.0, seed)
    pts[:, 0] = np.abs(pts[:, 0])  # fold into u1 > 0
    keep = (pts[:, 0] > 1e-9)
    keep &= spec.pole_distance(pts) > spec.mollify_radius
    keep &= np.linalg.norm(pts - A_PLUS, axis=1) > 1e-9
    pts = pts[keep][:n_samples]
    grad_w = spec.gradient(pts)
    if q_candidate == "radial":
        d = pts - A_PLUS
        qu = d / np.linalg.norm(d, axis=1, keepdims=True)
    else:
        qu = np.asarray(q_grad(pts), dtype=float)
    dots = np.einsum("ij,ij->i", grad_w, qu)
    bad = dots < -1e-10
    return QMonotonicityReport(
        violations=pts[bad],
        fraction=float(np.mean(bad)) if len(pts) else 0.0,
        n_effective=int(len(pts)),
        worst=float(dots.min()) if len(pts) else 0.0,
    )
