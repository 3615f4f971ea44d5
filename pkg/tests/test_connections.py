import math

import numpy as np
import pytest
from scipy.integrate import quad

from twinwell.connections import (ActionFormulas, BracketError, Path, PathError,
                                  axis_action, closed_form_actions,
                                  connection_result, find_crossing,
                                  geometric_action, geometry_report,
                                  implicit_curve, implicit_residual,
                                  implicit_value, lagrangian_action,
                                  minimize_path, profile_on_grid,
                                  reparametrize_equipartition,
                                  scalar_connection, semicircle_path,
                                  shoot_connections, upper_init)
from twinwell.contours import directed_hausdorff, hausdorff
from twinwell.potential import PotentialSpec

EPS_STD = math.sqrt(3.0) / 6.0
SQRT2 = math.sqrt(2.0)


def axis_action_oracle(spec):
    """Independent oracle: adaptive quadrature of sqrt(2 W) on the axis."""
    val, err = quad(lambda s: math.sqrt(2.0 * float(spec.value(np.array([s, 0.0])))),
                    -1.0, 1.0, limit=400)
    assert err < 1e-5 * max(1.0, val)
    return val


class TestActions:
    def test_straight_segment_matches_antiderivative(self, w1_unit):
        # oracle: the exact antiderivative of sqrt(2) (1-s^2)/(s^2+eps^2)
        seg = np.stack([np.linspace(-1, 1, 2001), np.zeros(2001)], axis=1)
        got = geometric_action(w1_unit, seg)
        exact = SQRT2 * (math.pi - 2.0)
        assert got == pytest.approx(exact, abs=1e-4)

    def test_degenerate_path_zero(self, w1_unit):
        seg = np.tile([1.0, 0.0], (50, 1))
        assert geometric_action(w1_unit, seg) == 0.0

    def test_small_eps_semicircle(self):
        # oracle: limit metric integral = int_0^pi 2 sqrt2 sin = 4 sqrt2
        spec = PotentialSpec("W1", 1e-3)
        arc = semicircle_path(4001)
        got = geometric_action(spec, arc)
        assert got == pytest.approx(4.0 * SQRT2, rel=0.01)

    def test_lagrangian_equals_geometric_at_equipartition(self, w1_unit):
        e0 = scalar_connection(w1_unit, 2001)
        lag = lagrangian_action(w1_unit, e0.path)
        geo = geometric_action(w1_unit, e0.path)
        assert lag == pytest.approx(geo, rel=1e-3)

    def test_lagrangian_constant_path_zero(self, w1_unit):
        p = Path(np.tile([1.0, 0.0], (201, 1)), param="x1-graph",
                 x1=np.linspace(0, 1, 201))
        assert lagrangian_action(w1_unit, p) == 0.0

    def test_compressed_grid_is_larger(self, w1_unit):
        nodes = np.stack([np.linspace(-1, 1, 501), np.zeros(501)], axis=1)
        path = reparametrize_equipartition(w1_unit, Path(nodes))
        relaxed = lagrangian_action(w1_unit, path)
        squeezed = Path(nodes, param="x1-graph", x1=0.5 * path.x1)
        assert lagrangian_action(w1_unit, squeezed) > relaxed

    def test_lagrangian_rejects_nonmonotone(self, w1_unit):
        p = Path(np.stack([np.linspace(-1, 1, 201), np.zeros(201)], axis=1),
                 param="x1-graph", x1=np.linspace(1, -1, 201))
        with pytest.raises(PathError):
            lagrangian_action(w1_unit, p)

    def test_parametrization_invariance(self, w1_std, w1_std_pair):
        up, _ = w1_std_pair
        dense = semicircle_path(4001)
        # same geometric curve, two parametrizations
        t = np.linspace(0, 1, 4001) ** 1.5
        warped = np.stack([-np.cos(math.pi * t), np.sin(math.pi * t)], axis=1)
        a = geometric_action(w1_std, dense.nodes)
        b = geometric_action(w1_std, warped)
        assert a == pytest.approx(b, rel=1e-6)


class TestScalarConnection:
    def test_action_and_equipartition_eps1(self, w1_unit):
        e0 = scalar_connection(w1_unit, 2001)
        assert e0.equipartition_residual <= 1e-6
        assert e0.action == pytest.approx(SQRT2 * (math.pi - 2.0), abs=1e-4)
        assert e0.action == pytest.approx(axis_action_oracle(w1_unit), abs=1e-9)

    def test_odd_symmetry_exact(self, w1_unit):
        e0 = scalar_connection(w1_unit, 2001)
        e = e0.path.nodes[:, 0]
        assert np.array_equal(e, -e[::-1])
        k0 = len(e) // 2
        assert e[k0] == 0.0 and e0.path.x1[k0] == 0.0

    def test_w2_scalar(self):
        spec = PotentialSpec("W2", 0.2, 0.7)
        e0 = scalar_connection(spec, 2001)
        assert math.isfinite(e0.action) and e0.action > 0
        assert e0.action == pytest.approx(axis_action_oracle(spec), rel=1e-8)
        # consistent evaluation of the squared two-factor axis profile
        s = np.linspace(-0.9, 0.9, 101)
        direct = ((1 - s * s) ** 2 / ((s * s + 0.04) * (s * s + 0.49))) ** 2
        assert np.allclose(spec.value(np.stack([s, 0 * s], axis=1)), direct,
                           rtol=1e-12)

    def test_rejects_even_n(self, w1_unit):
        with pytest.raises(PathError):
            scalar_connection(w1_unit, 2000)


class TestMinimizePath:
    def test_upper_below_scalar(self, w1_std, w1_std_pair, w1_std_scalar):
        up, _ = w1_std_pair
        assert up.path.classification == "upper"
        assert up.action < w1_std_scalar.action

    def test_fixed_point_rerun(self, w1_std, w1_std_pair):
        up, _ = w1_std_pair
        again = minimize_path(w1_std, up.path)
        # stagnation-rule bound: a rerun may shave at most ~tol_rel relative
        assert abs(again.action - up.action) <= 1e-6 * up.action

    def test_mirror_action_equal_exactly(self, w1_std, w1_std_pair):
        up, lo = w1_std_pair
        assert lo.action == up.action
        assert lo.path.classification == "lower"

    def test_endpoint_validation(self, w1_std):
        bad = semicircle_path(301)
        bad.nodes[0] = (-0.9, 0.0)
        with pytest.raises(PathError):
            minimize_path(w1_std, bad)

    def test_pole_zone_init_rejected(self, w1_std):
        with pytest.raises(PathError):
            minimize_path(w1_std, semicircle_path(301, height=w1_std.eps1))


class TestReparametrization:
    def test_scalar_roundtrip(self, w1_unit):
        e0 = scalar_connection(w1_unit, 4001)
        again = reparametrize_equipartition(w1_unit, e0.path)
        # same construction up to quadrature tolerance on the resolved region
        # (segment midpoint sums cannot reproduce the log-divergent tails)
        sel = np.abs(e0.path.nodes[:, 0]) <= 0.9
        assert np.max(np.abs(again.x1[sel] - e0.path.x1[sel])) <= 1e-6

    def test_abscissae_increase(self, w1_std):
        arc = semicircle_path(501)
        path = reparametrize_equipartition(w1_std, arc)
        assert np.all(np.diff(path.x1) > 0)

    def test_equipartition_residual_of_minimizer(self, w1_std, w1_std_pair):
        up, _ = w1_std_pair
        wmax = float(np.max(w1_std.value(up.path.nodes)))
        assert up.equipartition_residual <= 1e-3 * wmax

    def test_interior_zero_w_rejected(self, w1_unit):
        nodes = np.stack([np.linspace(-1, 1, 201), np.zeros(201)], axis=1)
        nodes[100] = (1.0, 0.0)  # interior node at a well
        with pytest.raises(PathError):
            reparametrize_equipartition(w1_unit, Path(nodes))


class TestShooting:
    def test_w1_standard_count(self, w1_std_shot):
        assert len(w1_std_shot) == 3
        kinds = sorted(r.path.classification for r in w1_std_shot)
        assert kinds == ["lower", "scalar", "upper"]

    def test_count_stable_under_refinement(self, w1_std, w1_std_c0, w1_std_shot):
        refined = shoot_connections(w1_std, (0.0, 2.4), 800, c0=w1_std_c0)
        assert len(refined) == len(w1_std_shot) == 3

    def test_axis_shot_stays_on_axis(self, w1_std, w1_std_c0):
        from twinwell import kernels

        res = kernels.shoot_vertical(w1_std, 0.0, x1_span=40.0,
                                     escape_radius=w1_std_c0.radius,
                                     record_every=10)
        assert np.max(np.abs(res.u[:, 1])) <= 1e-12
        assert res.best_dist <= 0.01

    def test_shoot_matches_minimizer(self, w1_std_shot, w1_std_pair):
        up_shot = [r for r in w1_std_shot if r.path.classification == "upper"][0]
        up_min, _ = w1_std_pair
        assert hausdorff(up_shot.path.nodes, up_min.path.nodes) <= 0.02

    def test_residual_tolerances(self, w1_std, w1_std_shot):
        for res in w1_std_shot:
            wmax = float(np.max(w1_std.value(res.path.nodes)))
            gmax = float(np.max(np.linalg.norm(
                w1_std.gradient(res.path.nodes), axis=1)))
            assert res.equipartition_residual <= 1e-3 * wmax
            assert res.ode_residual <= 1e-2 * gmax

    def test_w2_count_five(self, w2_crit_sigma):
        e1, cross = w2_crit_sigma
        spec = PotentialSpec("W2", e1, cross.root)
        shot = shoot_connections(spec, (0.0, 2.4), 800,
                                 c0=None, scalar_N=1001)
        assert len(shot) == 5


class TestClosedForms:
    def test_w1_printed_values(self, w1_unit):
        f = closed_form_actions(w1_unit)
        # oracle: arithmetic evaluation of the printed formulas
        assert f.E0 == pytest.approx((2 * (math.pi - math.pi / 4) - 1) / SQRT2,
                                     abs=1e-12)
        assert f.E0 == pytest.approx(2.625, abs=1e-3)

    def test_w1_small_eps_limit(self):
        f = closed_form_actions(PotentialSpec("W1", 1e-8))
        assert f.E_pm == pytest.approx(4.0 / SQRT2, rel=1e-6)

    def test_w2_equal_at_formula_crossing(self):
        e1 = 0.1266
        make = lambda e2: PotentialSpec("W2", e1, e2)  # noqa: E731
        res = find_crossing(make, (1.05, 2.0), "sigma_star", "closed-form")
        f = closed_form_actions(make(res.root))
        assert f.E_I == pytest.approx(f.E_II, abs=1e-3)

    def test_singular_guards(self):
        with pytest.raises(ValueError):
            closed_form_actions(PotentialSpec("W2", 0.5, 0.5))


class TestCrossings:
    def test_closed_form_root(self):
        make = lambda e: PotentialSpec("W1", e)  # noqa: E731
        res = find_crossing(make, (0.1, 1.0), "eps_star", "closed-form")
        # oracle: independent bisection on the printed formulas
        def gap(e):
            f = closed_form_actions(make(e))
            return f.E_pm - f.E0
        lo, hi = 0.1, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if gap(mid) * gap(lo) > 0:
                lo = mid
            else:
                hi = mid
        assert res.root == pytest.approx(0.5 * (lo + hi), abs=1e-4)
        assert res.bracket[1] - res.bracket[0] <= 1e-4

    def test_no_sign_change_is_reported(self):
        make = lambda e: PotentialSpec("W1", e)  # noqa: E731
        with pytest.raises(BracketError) as err:
            find_crossing(make, (0.9, 1.1), "eps_star", "closed-form")
        assert len(err.value.probes) == 2

    def test_monotone_brackets(self):
        make = lambda e: PotentialSpec("W1", e)  # noqa: E731
        res = find_crossing(make, (0.1, 1.0), "eps_star", "closed-form")
        assert abs(res.gap_at_root) <= 1e-3


class TestImplicit:
    def test_axis_identically_zero(self, w1_std):
        pts = np.stack([np.linspace(-2, 2, 101), np.zeros(101)], axis=1)
        assert np.allclose(implicit_value(w1_std, pts), 0.0, atol=1e-14)

    def test_zero_set_self_residual(self, w1_std):
        curve = implicit_curve(w1_std, half="upper")
        assert len(curve) > 100
        vals = implicit_value(w1_std, curve)
        assert float(np.max(np.abs(vals))) <= 1e-6

    def test_converged_path_near_zero_set(self, w1_std, w1_std_pair):
        up, _ = w1_std_pair
        rep = implicit_residual(w1_std, up.path)
        assert rep.hausdorff_to_curve <= 0.05
        assert not rep.reconcile

    def test_shooting_path_residual_small(self, w1_std, w1_std_shot):
        up = [r for r in w1_std_shot if r.path.classification == "upper"][0]
        # the shot integrates the ODE whose first integral this is
        assert up.implicit_residual <= 5e-3


class TestGeometry:
    def test_standard_region_convex(self, w1_std, w1_std_pair):
        up, lo = w1_std_pair
        rep = geometry_report(up.path, lo.path, w1_std)
        assert rep.convex
        assert rep.mirror_hausdorff <= 1e-8

    def test_small_eps_circle(self):
        spec = PotentialSpec("W1", 1e-3)
        up = minimize_path(spec, upper_init(spec, 1001))
        lo = connection_result(spec, up.path.mirrored())
        rep = geometry_report(up.path, lo.path, spec)
        assert rep.circle_deviation <= 0.05

    def test_crossing_paths_rejected(self, w1_std, w1_std_pair):
        up, _ = w1_std_pair
        wobble = up.path.nodes.copy()
        wobble[len(wobble) // 2, 1] = -0.2
        bad = Path(wobble, classification="upper")
        with pytest.raises(PathError):
            geometry_report(bad, up.path.mirrored(), w1_std)


class TestProfiles:
    def test_clamps_to_wells(self, w1_unit):
        e0 = scalar_connection(w1_unit, 501)
        grid = np.linspace(-40, 40, 81)
        p = profile_on_grid(e0.path, grid)
        assert np.allclose(p[0], [-1, 0], atol=1e-12)
        assert np.allclose(p[-1], [1, 0], atol=1e-12)
