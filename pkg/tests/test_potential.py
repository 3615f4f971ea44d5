import math

import numpy as np
import pytest

from twinwell.potential import (A_MINUS, A_PLUS, GROUP, PotentialError,
                                PotentialSpec, build_C0, check_Q_monotonicity,
                                check_symmetry, evaluate, group_table_closed,
                                hessian, minima_and_convexity, near_pole_flagged,
                                w2_critical_eps1)

EPS_STD = math.sqrt(3.0) / 6.0


def fd_hessian(spec, u, step=1e-4):
    """Independent oracle: second-order central differences of W values."""
    u = np.asarray(u, dtype=float)
    h = np.zeros((2, 2))
    for a in range(2):
        for b in range(2):
            acc = 0.0
            for sa in (1, -1):
                for sb in (1, -1):
                    p = u.copy()
                    p[a] += sa * step
                    p[b] += sb * step
                    acc += sa * sb * float(spec.value(p))
            h[a, b] = acc / (4.0 * step * step)
    return h


class TestGroup:
    def test_table_closed(self):
        assert group_table_closed()

    def test_involutolutions_and_product(self):
        t1, t2, s = GROUP[1].matrix, GROUP[2].matrix, GROUP[3].matrix
        assert np.array_equal(t1 @ t1, np.eye(2))
        assert np.array_equal(t2 @ t2, np.eye(2))
        assert np.array_equal(s @ s, np.eye(2))
        assert np.array_equal(t1 @ t2, s)
        assert np.array_equal(t2 @ t1, s)


class TestSpecValidation:
    def test_w1_rejects_second_parameter(self):
        with pytest.raises(PotentialError):
            PotentialSpec("W1", 0.5, 0.7)

    def test_w2_ordering(self):
        with pytest.raises(PotentialError):
            PotentialSpec("W2", 0.7, 0.5)

    def test_json_round_trip(self):
        spec = PotentialSpec("W2", 0.2, 0.5, mollify_radius=0.05, cap_value=1e5)
        again = PotentialSpec.from_json(spec.to_json())
        assert again == spec

    def test_json_rejects_unknown_keys(self):
        with pytest.raises(PotentialError):
            PotentialSpec.from_json({"family": "W1", "eps": 1.0, "bogus": 2})

    def test_critical_eps1_sentinel(self):
        spec = PotentialSpec.from_json(
            {"family": "W2", "eps1": "critical", "eps2": 1.0})
        assert spec.eps1 == pytest.approx(w2_critical_eps1(), abs=0)
        assert 0.126 < spec.eps1 < 0.127


class TestEvaluate:
    def test_minimum_a_plus(self, w1_unit):
        value, grad = evaluate(w1_unit, (1.0, 0.0))
        assert value == 0.0
        assert np.all(grad == 0.0)

    def test_origin_value_one(self, w1_unit):
        value, grad = evaluate(w1_unit, (0.0, 0.0))
        assert value == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(grad, 0.0, atol=1e-15)

    def test_w2_minimum_a_minus(self):
        spec = PotentialSpec("W2", 0.2, 0.5)
        value, grad = evaluate(spec, (-1.0, 0.0))
        assert value == 0.0
        assert np.allclose(grad, 0.0, atol=1e-14)

    def test_rejects_non_finite(self, w1_unit):
        with pytest.raises(PotentialError):
            evaluate(w1_unit, (float("nan"), 0.0))

    def test_nonnegative_and_zero_only_at_wells(self, w1_std):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-3, 3, size=(4000, 2))
        w = w1_std.value(pts)
        assert np.all(w >= 0.0)
        tiny = pts[w < 1e-12]
        if len(tiny):
            d = np.minimum(np.linalg.norm(tiny - A_PLUS, axis=1),
                           np.linalg.norm(tiny - A_MINUS, axis=1))
            assert np.all(d < 1e-6)

    def test_cap_is_identity_below_threshold(self, w1_std):
        # bit-equal to the raw rational value wherever W <= cap/10
        rng = np.random.default_rng(4)
        pts = rng.uniform(-3, 3, size=(2000, 2))
        z = pts[:, 0] + 1j * pts[:, 1]
        f = (z * z - 1) / (z * z + w1_std.eps1 ** 2)
        raw = f.real * f.real + f.imag * f.imag
        sel = raw <= w1_std.cap_threshold
        capped = w1_std.value(pts)
        assert np.array_equal(capped[sel], raw[sel])

    def test_cap_bounds(self):
        spec = PotentialSpec("W1", 0.3, cap_value=100.0)
        pts = np.stack([np.zeros(200), np.linspace(-0.6, 0.6, 200)], axis=1)
        w = spec.value(pts)
        assert np.all(w <= 100.0) and np.all(w >= 0.0)
        assert float(spec.value(np.array([0.0, 0.3]))) == 100.0


class TestGradientAndHessian:
    def test_gradient_matches_fd(self, w1_std):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-3, 3, size=(1000, 2))
        pts = pts[w1_std.pole_distance(pts) > 2 * w1_std.mollify_radius]
        w, g = w1_std.value_and_gradient(pts)
        step = 1e-6
        for k in range(2):
            dp = np.zeros(2)
            dp[k] = step
            fd = (w1_std.value(pts + dp) - w1_std.value(pts - dp)) / (2 * step)
            scale = np.maximum(1.0, np.abs(fd))
            assert np.max(np.abs(fd - g[:, k]) / scale) <= 1e-5

    def test_gradient_equivariance(self, w1_std):
        rng = np.random.default_rng(6)
        pts = rng.uniform(-3, 3, size=(500, 2))
        g = w1_std.gradient(pts)
        for elem in GROUP[1:]:
            gg = w1_std.gradient(elem.apply(pts))
            assert np.max(np.abs(gg - elem.apply(g))) <= 1e-10

    def test_hessian_at_well_eps1(self, w1_unit):
        h = hessian(w1_unit, (1.0, 0.0))
        oracle = fd_hessian(w1_unit, (1.0, 0.0))
        assert np.allclose(h, np.diag([2.0, 2.0]), atol=1e-4)
        assert np.allclose(h, oracle, atol=1e-4)

    def test_hessian_mirror_well(self, w1_unit):
        assert np.allclose(hessian(w1_unit, (-1.0, 0.0)),
                           hessian(w1_unit, (1.0, 0.0)), atol=1e-8)

    def test_hessian_eps_half(self):
        spec = PotentialSpec("W1", 0.5)
        h = hessian(spec, (1.0, 0.0))
        assert np.allclose(h, np.diag([5.12, 5.12]), atol=1e-3)
        assert np.allclose(h, fd_hessian(spec, (1.0, 0.0)), atol=1e-3)

    def test_hessian_symmetry(self, w1_std):
        rng = np.random.default_rng(7)
        for _ in range(20):
            u = rng.uniform(-2, 2, size=2)
            if near_pole_flagged(w1_std, u):
                continue
            h = hessian(w1_std, u)
            assert abs(h[0, 1] - h[1, 0]) <= 1e-6


class TestSymmetry:
    def test_w1_symmetric(self, w1_unit):
        assert check_symmetry(w1_unit, 1000) <= 1e-12

    def test_w2_symmetric(self):
        assert check_symmetry(PotentialSpec("W2", 0.2, 0.7), 1000) <= 1e-12

    def test_broken_double_detected(self, w1_unit):
        class Broken:
            group_elements = w1_unit.group_elements

            def value(self, pts):
                return w1_unit.value(pts) + 0.2 * pts[..., 0]

        assert check_symmetry(Broken(), 1000) > 0.1

    def test_sample_floor(self, w1_unit):
        with pytest.raises(PotentialError):
            check_symmetry(w1_unit, 50)


class TestMinima:
    def test_w1_unit(self, w1_unit):
        mi = minima_and_convexity(w1_unit)
        assert np.allclose(mi.a_plus, A_PLUS, atol=1e-12)
        assert np.allclose(mi.a_minus, A_MINUS, atol=1e-12)
        assert mi.hess_eigs == pytest.approx((2.0, 2.0), abs=1e-6)
        assert mi.r0 >= 0.2
        assert 0.0 < mi.c <= math.sqrt(2.0)

    def test_w1_standard_exact_wells(self):
        mi = minima_and_convexity(PotentialSpec("W1", 0.2887))
        assert np.allclose(mi.a_plus, (1.0, 0.0), atol=1e-12)

    def test_w2_wells(self):
        mi = minima_and_convexity(PotentialSpec("W2", 0.1266, 0.5))
        assert np.allclose(mi.a_plus, (1.0, 0.0), atol=1e-10)
        assert mi.degenerate
        assert mi.c > 0

    def test_scan_oracle(self, w1_std):
        # oracle: eigenvalue scan on an independent radial grid
        mi = minima_and_convexity(w1_std)
        rng = np.random.default_rng(8)
        for _ in range(200):
            r = mi.r0 * math.sqrt(rng.uniform(0.01, 1.0))
            t = rng.uniform(0, 2 * math.pi)
            u = mi.a_plus + r * np.array([math.cos(t), math.sin(t)])
            eig = np.linalg.eigvalsh(fd_hessian(w1_std, u))[0]
            assert eig >= 0.8 * mi.c ** 2 - 1e-6


class TestBoundingDisk:
    def test_w1_standard_accepts_two(self, w1_std, w1_std_pair):
        c0 = build_C0(w1_std, [r.path for r in w1_std_pair])
        assert c0.radius == 2.0
        assert c0.margin >= 0.2

    def test_empty_input(self, w1_std):
        c0 = build_C0(w1_std)
        assert c0.radius == 2.0
        assert c0.margin == pytest.approx(1.0, abs=1e-12)

    def test_large_eps_envelope(self):
        spec = PotentialSpec("W1", 5.0)
        t = np.linspace(-3.0, 3.0, 301)
        envelope = np.stack([np.sqrt(t * t / 3.0 + 1.0), t], axis=1)
        c0 = build_C0(spec, [envelope])
        assert c0.radius >= np.max(np.linalg.norm(envelope, axis=1)) + 0.2
        assert c0.contains(envelope, margin=0.2).all()

    def test_no_radius_fits(self, w1_std):
        far = np.array([[5.0, 0.0]])
        with pytest.raises(PotentialError):
            build_C0(w1_std, [far])

    def test_projection(self, w1_std):
        c0 = build_C0(w1_std)
        assert np.allclose(c0.project(np.array([5.0, 0.0])), [2.0, 0.0])
        inside = np.array([0.3, -0.4])
        assert np.array_equal(c0.project(inside), inside)


class TestQMonotonicity:
    def test_axis_ray_clean(self, w1_unit):
        # oracle: sign of d/dt W(1 + t, 0) on the outward ray
        ts = np.linspace(1e-3, 0.5, 200)
        pts = np.stack([1.0 + ts, np.zeros_like(ts)], axis=1)
        grad = w1_unit.gradient(pts)
        dots = grad[:, 0] * 1.0
        assert np.all(dots >= -1e-10)

    def test_violations_reported(self, w1_std):
        rep = check_Q_monotonicity(w1_std, "radial", 10_000, seed=1)
        assert rep.n_effective > 5000
        assert rep.fraction > 0.0          # pole region violates the radial test
        assert len(rep.violations) == int(round(rep.fraction * rep.n_effective))

    def test_custom_q_hook(self, w1_std):
        def q_grad(pts):
            d = pts - A_PLUS
            return d / np.linalg.norm(d, axis=1, keepdims=True)

        a = check_Q_monotonicity(w1_std, "radial", 2000, seed=2)
        b = check_Q_monotonicity(w1_std, "custom", 2000, seed=2, q_grad=q_grad)
        assert a.fraction == b.fraction
