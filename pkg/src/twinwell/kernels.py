"""Kernel lane selection: compiled RK4 integrator with pure-Python fallback.

The compiled extension (twinwell._shoot, Cython) is preferred when it built;
``TWINWELL_PURE=1`` in the environment forces the pure lane.  Both lanes share
one contract, so results differ only by floating-point noise; the test suite
pins them against each other and ``benchmarks/bench_kernels.py`` compares
their speed.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _shoot_py

_compiled = None
if os.environ.get("TWINWELL_PURE") != "1":
    try:
        from . import _shoot as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_lane = _compiled if _compiled is not None else _shoot_py


@dataclass
class TrajectoryResult:
    """Outcome of one RK4 shot toward the target minimum."""

    exit_code: int          # 0 escaped, 1 step budget exhausted, 2 pole zone
    n_steps: int
    best_x1: float          # abscissa of the closest approach to the target
    best_dist: float
    best_u: np.ndarray      # value at the closest approach
    max_u1: float
    x1: np.ndarray          # recorded abscissae (empty when not recording)
    u: np.ndarray           # recorded values, shape (m, 2)

    @property
    def flagged(self) -> bool:
        return self.exit_code == 2

    @property
    def overshoot(self) -> float:
        """Signed miss: largest u1 reached minus the target abscissa 1.

        Negative shots turn back before the well, positive ones pass beyond
        it; the sign flips exactly at a connection.
        """
        return self.max_u1 - 1.0


def _pole_heights(spec) -> tuple[float, float]:
    return spec.eps1, (spec.eps2 if spec.eps2 is not None else spec.eps1)


def integrate_trajectory(spec, u0, v0, *, drag: float = 0.0, step: float = 1e-3,
                         x1_span: float = 40.0, escape_radius: float = 2.0,
                         target=None, record_every: int = 0,
                         turn_stop: bool = False,
                         u1_stop: float = 1.2) -> TrajectoryResult:
    """Integrate u'' = W_u(u) - drag u' from (u0, v0) over at most x1_span.

    With turn_stop the shot ends at its first u1-turnaround or when u1
    passes u1_stop (first-passage semantics for the overshoot miss).
    """
    nfac, e1sq, e2sq, cap = spec.kernel_params()
    p1, p2 = _pole_heights(spec)
    if target is None:
        target = (1.0, 0.0)
    n_max = int(round(x1_span / step))
    out = _lane.integrate(nfac, e1sq, e2sq, cap,
                          float(u0[0]), float(u0[1]), float(v0[0]), float(v0[1]),
                          float(drag), float(step), n_max, float(escape_radius),
                          float(target[0]), float(target[1]),
                          float(spec.mollify_radius), p1, p2, int(record_every),
                          int(turn_stop), float(u1_stop))
    code, n, bx1, bd, bu1, bu2, mu1, rx, ru = out
    return TrajectoryResult(int(code), int(n), float(bx1), float(bd),
                            np.array([bu1, bu2]), float(mu1),
                            np.asarray(rx), np.asarray(ru))


def shoot_vertical(spec, c: float, turn_stop: bool = True, **kw) -> TrajectoryResult:
    """Standard shot: start at (0, c) with the first-integral speed along +u1.

    First-passage semantics by default: the shot ends at its first
    u1-turnaround or once it passes beyond the target well, which keeps the
    overshoot miss single-valued for shots that would otherwise bounce
    around the bounded inter-pole region.
    """
    w0 = float(spec.value(np.array([0.0, c])))
    v1 = math.sqrt(max(2.0 * w0, 0.0))
    return integrate_trajectory(spec, (0.0, c), (v1, 0.0), turn_stop=turn_stop, **kw)


def scan_miss(spec, cs: np.ndarray, *, step: float = 1e-3, x1_span: float = 40.0,
              escape_radius: float = 2.0, turn_stop: bool = True):
    """Overshoot miss function over an array of shooting heights.

    Returns (codes, miss, best_dist).  The compiled lane loops the scalar
    integrator; the pure lane uses the vectorized batch integrator.
    """
    cs = np.asarray(cs, dtype=float)
    nfac, e1sq, e2sq, cap = spec.kernel_params()
    p1, p2 = _pole_heights(spec)
    n_max = int(round(x1_span / step))
    if _compiled is not None:
        codes = np.empty(len(cs), dtype=np.int64)
        miss = np.empty(len(cs))
        dist = np.empty(len(cs))
        for i, c in enumerate(cs):
            res = shoot_vertical(spec, float(c), step=step, x1_span=x1_span,
                                 escape_radius=escape_radius, turn_stop=turn_stop)
            codes[i], miss[i], dist[i] = res.exit_code, res.overshoot, res.best_dist
        return codes, miss, dist
    u0 = np.stack([np.zeros_like(cs), cs], axis=1)
    w0 = spec.value(u0)
    v0 = np.stack([np.sqrt(np.maximum(2.0 * w0, 0.0)), np.zeros_like(cs)], axis=1)
    codes, _bu2, dist, max_u1 = _shoot_py.scan(
        nfac, e1sq, e2sq, cap, u0, v0, 0.0, step, n_max,
        escape_radius, 1.0, 0.0, spec.mollify_radius, p1, p2,
        int(turn_stop), 1.2)
    return codes, max_u1 - 1.0, dist
