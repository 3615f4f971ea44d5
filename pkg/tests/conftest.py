import math

import pytest

from twinwell.connections import (QuadratureOptions, connection_result,
                                  find_crossing, minimize_path,
                                  scalar_connection, shoot_connections,
                                  upper_init, w2_pair_actions)
from twinwell.potential import PotentialSpec, build_C0, w2_critical_eps1

EPS_STD = math.sqrt(3.0) / 6.0


@pytest.fixture(scope="session")
def w1_std():
    return PotentialSpec("W1", EPS_STD)


@pytest.fixture(scope="session")
def w1_unit():
    return PotentialSpec("W1", 1.0)


@pytest.fixture(scope="session")
def w1_std_pair(w1_std):
    """Minimized upper connection and its mirror at the standard parameter."""
    up = minimize_path(w1_std, upper_init(w1_std, 301))
    lo = connection_result(w1_std, up.path.mirrored())
    return up, lo


@pytest.fixture(scope="session")
def w1_std_scalar(w1_std):
    return scalar_connection(w1_std, 2001)


@pytest.fixture(scope="session")
def w1_std_c0(w1_std, w1_std_pair):
    return build_C0(w1_std, [r.path for r in w1_std_pair])


@pytest.fixture(scope="session")
def w1_std_shot(w1_std, w1_std_c0):
    return shoot_connections(w1_std, (0.0, 2.4), 400, c0=w1_std_c0)


@pytest.fixture(scope="session")
def w2_crit_sigma():
    """Equal-action outer parameter of the two-parameter family (quadrature)."""
    e1 = w2_critical_eps1()
    make = lambda e2: PotentialSpec("W2", e1, e2)  # noqa: E731
    res = find_crossing(make, (0.7, 2.0), "sigma_star", "quadrature",
                        tol=1e-4, qopts=QuadratureOptions(path_N=301))
    return e1, res


@pytest.fixture(scope="session")
def w2_crit_pairs(w2_crit_sigma):
    """(spec, inner, outer) at sigma* and at 1.5 sigma*."""
    e1, cross = w2_crit_sigma
    out = {}
    for label, e2 in (("at_sigma", cross.root), ("above_sigma", 1.5 * cross.root)):
        spec = PotentialSpec("W2", e1, e2)
        inner, outer = w2_pair_actions(spec)
        out[label] = (spec, inner, outer)
    return out
