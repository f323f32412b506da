import numpy as np
import pytest

from swarmcover.area import TargetAreaSpec, field_gradient, signed_field
from swarmcover.control import (
    AgentState,
    ControlParams,
    NeighborView,
    build_neighbor_views,
    coverage_target,
    default_params,
    neighbor_mask,
    pair_geometry,
    stable_sigmoid,
    swarm_targets,
    velocity_command,
)


class TestDefaultParams:
    def test_paper_scale_values(self):
        # R0 = 25 m, N = 22
        s = np.pi * 25.0**2
        p = default_params(s, 22)
        assert p.d == 6.0
        assert p.a_r == pytest.approx(3.590, abs=2e-3)
        assert p.beta == pytest.approx(0.02037, abs=2e-5)

    def test_unit_area_single_agent(self):
        p = default_params(np.pi, 1)
        assert p.a_r == pytest.approx(0.38 * np.sqrt(np.pi), rel=1e-12)
        assert p.a_r == pytest.approx(0.6735, abs=2e-4)
        assert p.beta == pytest.approx(40.0 / np.pi, rel=1e-12)
        assert p.beta == pytest.approx(12.732, abs=1e-3)

    def test_scaling_law(self):
        p1 = default_params(10.0, 5)
        p4 = default_params(40.0, 5)
        assert p4.a_r == pytest.approx(2.0 * p1.a_r, rel=1e-12)
        assert p4.beta == pytest.approx(p1.beta / 4.0, rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            default_params(0.0, 5)
        with pytest.raises(ValueError):
            default_params(1.0, 0)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ControlParams(d=1.0, a_r=1.0, beta=1.0)
        with pytest.raises(ValueError):
            ControlParams(d=6.0, a_r=0.0, beta=1.0)
        with pytest.raises(ValueError):
            ControlParams(d=6.0, a_r=1.0, beta=-1.0)


class TestStableSigmoid:
    def test_midpoint(self):
        assert stable_sigmoid(0.0) == 0.5

    def test_extremes_saturate_without_overflow(self):
        # beyond ~|37| float64 rounds the tails to exactly 0 / 1
        for x in (1e3, 1e6, 1e300):
            assert stable_sigmoid(x) == 1.0
        for x in (-1e3, -1e6, -1e300):
            assert stable_sigmoid(x) == 0.0

    def test_monotone_and_strictly_interior(self):
        xs = np.linspace(-35, 35, 201)
        ys = stable_sigmoid(xs)
        assert np.all(np.diff(ys) >= 0)
        assert np.all(ys > 0.0) and np.all(ys < 1.0)


class TestCoverageTarget:
    def test_far_outside_unit_pull_inward(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        grad = np.array([2.0, 0.0])
        t = coverage_target(20.0, grad, params, NeighborView.empty())
        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-8)
        np.testing.assert_allclose(t, [-1.0, 0.0], atol=1e-8)

    def test_deep_inside_norm_vanishes(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        t = coverage_target(-20.0, [2.0, 0.0], params, NeighborView.empty())
        assert np.linalg.norm(t) < 1e-8

    def test_boundary_with_one_neighbor(self):
        # A = 0 so the gate is 1/2; neighbor at distance a_R along +x
        params = ControlParams(d=6.0, a_r=2.0, beta=0.7)
        view = NeighborView(offsets=[[2.0, 0.0]], distances=[2.0])
        t = coverage_target(0.0, [5.0, 0.0], params, view)
        np.testing.assert_allclose(t, [-1.5, 0.0], atol=1e-12)

    def test_zero_gradient_leaves_only_repulsion(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        view = NeighborView(offsets=[[1.0, 0.0]], distances=[1.0])
        t = coverage_target(-3.0, [0.0, 0.0], params, view)
        np.testing.assert_allclose(t, [-1.0, 0.0], atol=1e-12)

    def test_gate_norm_strictly_between_zero_and_one(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=2.0)
        for a in (-15.0, -5.0, 0.0, 5.0, 15.0):
            t = coverage_target(a, [1.0, 1.0], params, NeighborView.empty())
            assert 0.0 < np.hypot(t[0], t[1]) < 1.0
        # far in the tails the gate saturates in float64 but stays bounded
        for a in (-300.0, 300.0):
            t = coverage_target(a, [1.0, 1.0], params, NeighborView.empty())
            assert 0.0 <= np.hypot(t[0], t[1]) <= 1.0
            assert np.all(np.isfinite(t))

    def test_repulsion_antisymmetric_pair(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        pos = np.array([[0.0, 0.0], [0.7, 0.4]])
        views = build_neighbor_views(pos, params)
        t0 = coverage_target(-50.0, [0.0, 0.0], params, views[0])
        t1 = coverage_target(-50.0, [0.0, 0.0], params, views[1])
        np.testing.assert_allclose(t0, -t1, atol=1e-12)

    def test_repulsion_points_away_from_neighbor(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        view = NeighborView(offsets=[[0.5, 0.0]], distances=[0.5])
        t = coverage_target(-50.0, [0.0, 0.0], params, view)
        assert t[0] < 0.0  # neighbor at +x pushes agent toward -x

    def test_rotational_equivariance(self):
        rng = np.random.default_rng(5)
        spec = TargetAreaSpec(1.0, 1.2, e_hat=[1.0, 0.0])
        params = default_params(spec.area, 4)
        pos = rng.uniform(-1, 1, (4, 2))
        phi = 0.9
        rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        spec_rot = TargetAreaSpec(1.0, 1.2, e_hat=rot @ np.array([1.0, 0.0]))
        views = build_neighbor_views(pos, params)
        views_rot = build_neighbor_views(pos @ rot.T, params)
        for i in range(4):
            t = coverage_target(
                signed_field(spec, pos[i]), field_gradient(spec, pos[i]), params, views[i]
            )
            t_rot = coverage_target(
                signed_field(spec_rot, rot @ pos[i]),
                field_gradient(spec_rot, rot @ pos[i]),
                params,
                views_rot[i],
            )
            np.testing.assert_allclose(t_rot, rot @ t, atol=1e-10)


class TestVelocityCommand:
    def test_zero_target(self):
        a = AgentState(0, [0.0, 0.0], 1.5)
        np.testing.assert_array_equal(velocity_command(a, [0.0, 0.0]), [0.0, 0.0])

    def test_below_unit_norm_scales_linearly(self):
        a = AgentState(0, [0.0, 0.0], 2.0)
        np.testing.assert_allclose(velocity_command(a, [0.5, 0.0]), [1.0, 0.0], rtol=1e-12)

    def test_saturates_at_v0(self):
        a = AgentState(0, [0.0, 0.0], 1.0)
        np.testing.assert_allclose(velocity_command(a, [3.0, 4.0]), [0.6, 0.8], rtol=1e-12)

    def test_speed_bound_exact(self):
        rng = np.random.default_rng(9)
        for _ in range(500):
            v0 = rng.uniform(0.01, 10.0)
            a = AgentState(0, [0.0, 0.0], v0)
            t = rng.normal(0, 10, 2) * 10 ** rng.uniform(-8, 8)
            v = velocity_command(a, t)
            assert np.linalg.norm(v) <= v0


class TestNeighborGeometry:
    def test_views_exclude_self(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        pos = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        views = build_neighbor_views(pos, params)
        assert all(len(v.distances) == 2 for v in views)

    def test_metric_rule_filters_far_pairs(self):
        pos = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        _, dist = pair_geometry(pos, None, params.a_r)
        m = neighbor_mask(dist, "metric", 2.0)
        assert m[0, 1] and m[1, 0]
        assert not m[0, 2] and not m[2, 0]
        assert not m.diagonal().any()

    def test_metric_rule_requires_radius(self):
        with pytest.raises(ValueError):
            neighbor_mask(np.zeros((2, 2)), "metric", None)

    def test_coincident_pair_clamped_deterministically(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        pos = np.array([[0.5, 0.5], [0.5, 0.5], [2.0, 0.0]])
        disp1, dist1 = pair_geometry(pos, None, params.a_r)
        disp2, dist2 = pair_geometry(pos, None, params.a_r)
        np.testing.assert_array_equal(disp1, disp2)
        assert dist1[0, 1] == pytest.approx(1e-6 * params.a_r)
        np.testing.assert_allclose(disp1[0, 1], -disp1[1, 0], atol=0)
        # direction from the pair's lowest id: angle 2*pi*0/3 = 0 -> +x
        np.testing.assert_allclose(
            disp1[0, 1] / np.linalg.norm(disp1[0, 1]), [1.0, 0.0], atol=1e-12
        )

    def test_coincident_views_have_positive_distances(self):
        params = ControlParams(d=6.0, a_r=1.0, beta=1.0)
        pos = np.array([[0.0, 0.0], [0.0, 0.0]])
        views = build_neighbor_views(pos, params)
        for v in views:
            assert np.all(v.distances > 0.0)


class TestSwarmTargetsMatchesScalarPath:
    def test_agreement_random_snapshots(self):
        rng = np.random.default_rng(21)
        spec = TargetAreaSpec(1.0, 0.8, e_hat=[1.0, 0.0])
        params = default_params(spec.area, 6)
        for _ in range(25):
            pos = rng.uniform(-1.5, 1.5, (6, 2))
            vals = signed_field(spec, pos)
            grads = field_gradient(spec, pos)
            disp, dist = pair_geometry(pos, None, params.a_r)
            mask = neighbor_mask(dist)
            batch = swarm_targets(vals, grads, params, disp, dist, mask)
            views = build_neighbor_views(pos, params)
            for i in range(6):
                expected = coverage_target(vals[i], grads[i], params, views[i])
                np.testing.assert_allclose(batch[i], expected, rtol=1e-12, atol=1e-14)

    def test_agreement_with_metric_rule(self):
        rng = np.random.default_rng(22)
        spec = TargetAreaSpec(1.0, 1.5, e_hat=[0.0, 1.0])
        params = default_params(spec.area, 5)
        pos = rng.uniform(-1, 1, (5, 2))
        vals = signed_field(spec, pos)
        grads = field_gradient(spec, pos)
        disp, dist = pair_geometry(pos, None, params.a_r)
        mask = neighbor_mask(dist, "metric", 0.8)
        batch = swarm_targets(vals, grads, params, disp, dist, mask)
        views = build_neighbor_views(pos, params, rule="metric", radius=0.8)
        for i in range(5):
            expected = coverage_target(vals[i], grads[i], params, views[i])
            np.testing.assert_allclose(batch[i], expected, rtol=1e-12, atol=1e-14)
