import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidar_deploy import optimize as opt
from lidar_deploy.geometry import Deployment, load_preset
from lidar_deploy.metric import VgopReport
from lidar_deploy.optimize import (
    InvalidSwarm, ObjectiveParams, SearchSpace, SwarmParams, clamp, de_mutation, de_pso,
    fitness, position_update, proxy_recall, pso_velocity, run_optimizer,
)
from lidar_deploy.scene import Scenario, ScenarioFrame, Vehicle
from lidar_deploy.synth import five_lane_scene

SPACE = SearchSpace((("height", 2.0, 4.5), ("tilt_x", 0.0, 25.0)))


def report(vid, p, entropy):
    return VgopReport(vid, p, p, p, 100, 100, 100, 0, 0, 0, entropy, 0)


def quadratic(x):
    return -((x[0] - 3.7) ** 2 + ((x[1] - 12.0) / 10.0) ** 2)


class TestFitness:
    def test_no_vehicles(self):
        scen = Scenario((ScenarioFrame(0), ScenarioFrame(1)))
        assert fitness(Deployment(), scen, load_preset("RS-16"), ObjectiveParams()) == 0.0

    def test_detected_vehicle_scores_entropy(self, monkeypatch):
        monkeypatch.setattr(opt, "scene_reports", lambda *a: iter([(0, report(1, 0.01, 1.2))]))
        scen = Scenario((ScenarioFrame(0, (Vehicle.on_ground(1, 0, 10),)),))
        assert fitness(Deployment(), scen, load_preset("RS-16"), ObjectiveParams()) == 1.2

    def test_unhit_vehicle_costs_loss(self):
        # beyond max range, so no returns
        scen = Scenario((ScenarioFrame(0, (Vehicle.on_ground(1, 0, 500),)),))
        assert fitness(Deployment(), scen, load_preset("RS-16"), ObjectiveParams()) == -1.0

    def test_loss_sign_is_a_penalty(self):
        scen = Scenario((ScenarioFrame(0, (Vehicle.on_ground(1, 0, 500),)),))
        params = ObjectiveParams(loss=2.5)
        assert fitness(Deployment(), scen, load_preset("RS-16"), params) == -2.5

    def test_threshold_is_inclusive(self):
        params = ObjectiveParams(delta=0.01)
        assert opt.vehicle_score(report(1, 0.01, 0.7), params) == 0.7
        assert opt.vehicle_score(report(1, 0.0099, 0.7), params) == -1.0

    def test_vehicle_order_invariance(self, coarse_model):
        scen = five_lane_scene(n_frames=2, n_vehicles=8, seed=3)
        flipped = Scenario(tuple(ScenarioFrame(f.frame_id, tuple(reversed(f.vehicles))) for f in scen.frames))
        dep = Deployment((0, 0, 3.0), 10.0)
        a = fitness(dep, scen, coarse_model, ObjectiveParams())
        b = fitness(dep, flipped, coarse_model, ObjectiveParams())
        assert a == b

    def test_frame_stride(self, coarse_model):
        scen = five_lane_scene(n_frames=4, n_vehicles=5, seed=1)
        dep = Deployment((0, 0, 3.0), 10.0)
        strided = fitness(dep, scen, coarse_model, ObjectiveParams(frame_stride=2))
        manual = fitness(dep, Scenario(scen.frames[::2]), coarse_model, ObjectiveParams())
        assert strided == manual


class TestProxyRecall:
    def test_all_none_half(self):
        assert proxy_recall([report(i, 0.2, 1.0) for i in range(4)], 0.005) == 1.0
        assert proxy_recall([report(i, 0.0, 0.0) for i in range(4)], 0.005) == 0.0
        mixed = [report(i, 0.2 if i < 3 else 0.001, 1.0) for i in range(6)]
        assert proxy_recall(mixed, 0.005) == 0.5

    def test_empty(self):
        assert proxy_recall([], 0.005) == 0.0


class TestPrimitives:
    def test_velocity_fixed_point(self):
        p = np.array([3.0, 5.0])
        np.testing.assert_array_equal(pso_velocity([0, 0], p, p, p, 0.7, 0.3, 0.2, 0.4, 0.9), [0, 0])

    def test_velocity_arithmetic(self):
        p = np.array([3.0, 5.0])
        v = pso_velocity([0, 0], p, p, [4.0, 10.0], 0.7, 0.3, 0.2, 0.3, 0.5)
        np.testing.assert_allclose(v, [0.1, 0.5], atol=1e-15)

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=2), st.floats(0, 1), st.floats(0, 1))
    def test_inertia_only(self, v, r1, r2):
        out = pso_velocity(v, [1.0, 2.0], [3.0, 4.0], [5.0, 6.0], 1.0, 0.0, 0.0, r1, r2)
        np.testing.assert_array_equal(out, v)

    def test_position_update(self):
        np.testing.assert_array_equal(position_update([2.0, 0.0], [0, 0]), [2.0, 0.0])
        np.testing.assert_array_equal(position_update([2.0, 0.0], [0.5, 3.0]), [2.5, 3.0])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
           st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
    def test_position_update_definitional(self, p, v):
        np.testing.assert_array_equal(position_update(p, v), np.add(p, v))

    def test_de_mutation(self):
        np.testing.assert_array_equal(de_mutation([3, 0], [4, 20], [4, 20], 0.5), [0, 0])
        v = de_mutation([3.0, 0.0], [4.0, 20.0], [2.0, 10.0], 0.5)
        np.testing.assert_array_equal(v, [1.0, 5.0])
        np.testing.assert_array_equal(position_update([3.0, 0.0], v), [4.0, 5.0])

    def test_clamp(self):
        np.testing.assert_array_equal(clamp([5.0, 12.0], SPACE), [4.5, 12.0])
        np.testing.assert_array_equal(clamp([3.0, -3.0], SPACE), [3.0, 0.0])
        np.testing.assert_array_equal(clamp([3.7, 12.0], SPACE), [3.7, 12.0])


class TestParams:
    @pytest.mark.parametrize("kw", [
        dict(swarm_size=3), dict(iterations=0), dict(gamma=1.5), dict(w1=-0.1), dict(a2=-1.0),
    ])
    def test_invalid_swarm(self, kw):
        with pytest.raises(InvalidSwarm):
            SwarmParams(**kw)

    def test_small_swarm_without_de(self):
        assert SwarmParams(swarm_size=2, gamma=0.0).swarm_size == 2

    @pytest.mark.parametrize("kw", [dict(delta=0.0), dict(delta=1.0), dict(loss=math.inf)])
    def test_invalid_objective(self, kw):
        with pytest.raises(ValueError):
            ObjectiveParams(**kw)

    def test_search_space_validation(self):
        with pytest.raises(ValueError):
            SearchSpace((("height", 3.0, 3.0),))
        with pytest.raises(ValueError):
            SearchSpace((("roll", 0.0, 1.0),))

    def test_to_deployment_keeps_base(self):
        space = SearchSpace((("height", 2, 4.5),), Deployment((1.0, 2.0, 3.0), 0.0, 7.0))
        dep = space.to_deployment([4.0])
        assert dep.position == (1.0, 2.0, 4.0) and dep.tilt_y == 7.0


class TestDePso:
    def test_constant_fitness(self):
        res = de_pso(lambda x: 3.25, SPACE, SwarmParams(iterations=5, swarm_size=6, seed=2))
        assert res.best_fitness == 3.25
        assert np.all(res.best_position >= SPACE.lower) and np.all(res.best_position <= SPACE.upper)

    def test_history_shape(self):
        res = de_pso(quadratic, SPACE, SwarmParams(iterations=3, swarm_size=5))
        assert [(r.iteration, r.particle) for r in res.history] == [(t, i) for t in (1, 2, 3) for i in range(5)]

    @given(st.integers(0, 10_000), st.floats(0, 1))
    @settings(max_examples=25, deadline=None)
    def test_invariants(self, seed, gamma):
        swarm = SwarmParams(iterations=15, swarm_size=6, gamma=gamma, seed=seed, w1=1.2, a1=1.5, a2=1.5)
        res = de_pso(quadratic, SPACE, swarm)
        gb = [r.global_best_fitness for r in res.history]
        assert all(b >= a for a, b in zip(gb, gb[1:]))
        pos = np.array([r.position for r in res.history])
        assert np.all(pos >= SPACE.lower) and np.all(pos <= SPACE.upper)
        for r in res.history:
            assert r.personal_best_fitness <= r.global_best_fitness
            assert quadratic(r.personal_best) == r.personal_best_fitness
        assert res.best_fitness == gb[-1]

    def test_deterministic(self):
        swarm = SwarmParams(iterations=20, swarm_size=8, seed=11, gamma=0.4)
        assert de_pso(quadratic, SPACE, swarm).history == de_pso(quadratic, SPACE, swarm).history

    def test_static_without_forces(self):
        swarm = SwarmParams(iterations=10, swarm_size=5, w1=1.0, a1=0.0, a2=0.0, gamma=0.0, seed=4)
        res = de_pso(quadratic, SPACE, swarm)
        first = [r.position for r in res.history if r.iteration == 1]
        for r in res.history:
            assert r.position == first[r.particle]
            assert r.velocity == (0.0, 0.0)

    def test_de_steps_occur_at_rate(self):
        res = de_pso(quadratic, SPACE, SwarmParams(iterations=200, swarm_size=10, gamma=0.1, seed=0))
        rate = np.mean([r.de_step for r in res.history])
        assert 0.07 < rate < 0.13

    def test_analytic_convergence(self):
        hits = 0
        for seed in range(10):
            res = de_pso(quadratic, SPACE, SwarmParams(seed=seed))
            h, t = res.best_position
            hits += abs(h - 3.7) <= 0.025 and abs(t - 12.0) <= 0.25
        assert hits >= 9


class TestRunOptimizer:
    def test_desk_scene_beats_baseline(self, coarse_model):
        scen = five_lane_scene(n_frames=3, n_vehicles=8, seed=5)
        params = ObjectiveParams()
        res = run_optimizer(scen, coarse_model, SPACE, SwarmParams(iterations=6, swarm_size=6, seed=1), params)
        base = fitness(Deployment((0, 0, 2.0)), scen, coarse_model, params)
        assert res.best_fitness >= base
        assert res.best_fitness == fitness(res.best, scen, coarse_model, params)
        assert len(res.history) == 36

    def test_invalid_swarm_propagates(self, coarse_model):
        with pytest.raises(InvalidSwarm):
            run_optimizer(five_lane_scene(1, 2), coarse_model, SPACE, SwarmParams(swarm_size=3), ObjectiveParams())
