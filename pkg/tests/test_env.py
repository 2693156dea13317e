import math
from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from hydromonitor.errors import EpisodeStateError, PlacementError, ShapeMismatchError
from hydromonitor.sim.arena import ArenaSpec, EnvId, Obstacle
from hydromonitor.sim.dynamics import DomainParams, VehicleState
from hydromonitor.sim.env import EnvMode, MonitoringEnv, build_observation, observation_width
from hydromonitor.sim.reward import RewardWeights, compute_reward
from hydromonitor.sim.targets import MonitoringParams, TargetState


def _park_near_target(env: MonitoringEnv, index: int, offset: float = 0.5) -> None:
    """Put the vehicle `offset` metres from a target, towards the arena centre, with raised uncertainties."""
    target = np.asarray(env.targets[index].true_pos)
    norm = float(np.linalg.norm(target))
    pos = target * (1.0 - offset / norm) if norm > offset else target
    env.vehicle = VehicleState(x=float(pos[0]), y=float(pos[1]), heading=0.0)
    env.targets = [replace(t, sigma=0.5) for t in env.targets]


class TestArena:
    def test_presets(self):
        assert len(ArenaSpec.preset(EnvId.ENV1).obstacles) == 0
        assert len(ArenaSpec.preset(EnvId.ENV2).obstacles) == 4

    def test_env2_needs_four_obstacles(self):
        with pytest.raises(ValidationError):
            ArenaSpec(env_id=EnvId.ENV2, obstacles=[Obstacle(center=(1.0, 1.0), radius=0.4)])

    def test_overlapping_obstacles_rejected(self):
        obstacles = [Obstacle(center=(0.0, 0.0), radius=0.4), Obstacle(center=(0.5, 0.0), radius=0.4),
                     Obstacle(center=(2.0, 2.0), radius=0.4), Obstacle(center=(-2.0, -2.0), radius=0.4)]
        with pytest.raises(ValidationError):
            ArenaSpec(env_id=EnvId.ENV2, obstacles=obstacles)

    def test_collision_geometry(self):
        arena = ArenaSpec.preset(EnvId.ENV2)
        assert arena.collides(4.8, 0.0, 0.3)
        assert arena.collides(2.5, 2.0, 0.3)
        assert not arena.collides(0.0, 0.0, 0.3)


class TestReward:
    def test_visit_bonus(self):
        assert compute_reward(1, [0, 0, 0], False, 0.0) == pytest.approx(10.0)

    def test_null_step(self):
        assert compute_reward(0, [0, 0, 0], False, 0.0) == 0.0

    def test_collision_and_uncertainty(self):
        assert compute_reward(0, [1, 1, 1], True, 0.0) == pytest.approx(-10.03)

    def test_progress_shaping_can_be_disabled(self):
        weights = RewardWeights(progress=0.0)
        assert compute_reward(0, [0, 0, 0], False, 0.7, weights) == 0.0

    def test_negative_weights_rejected(self):
        with pytest.raises(ValidationError):
            RewardWeights(visit=-1.0)


class TestObservation:
    def test_width(self):
        assert observation_width(3, 36) == 49

    def test_coincident_target_block_is_zero(self):
        dom = DomainParams.air()
        veh = VehicleState(0.0, 0.0, 0.0)
        targets = [TargetState((0.0, 0.0), (0.0, 0.0), 0.0, 0.0)] * 3
        obs = build_observation(veh, targets, np.full(36, 10.0), dom)
        np.testing.assert_array_equal(obs[4:7], [0.0, 0.0, 0.0])

    def test_max_range_scan_normalizes_to_one(self):
        dom = DomainParams.air()
        targets = [TargetState((1.0, 2.0), (1.0, 2.0), 0.3, 0.0)] * 3
        obs = build_observation(VehicleState(0.5, -0.5, 1.0), targets, np.full(36, 10.0), dom)
        np.testing.assert_array_equal(obs[13:], np.ones(36))

    def test_body_frame_offsets(self):
        dom = DomainParams.air()
        # heading +90 degrees: a target due north is straight ahead
        targets = [TargetState((0.0, 2.0), (0.0, 2.0), 2.5, 0.0)] * 3
        obs = build_observation(VehicleState(0.0, 0.0, math.pi / 2), targets, np.full(36, 10.0), dom)
        np.testing.assert_allclose(obs[4:7], [0.2, 0.0, 0.5], atol=1e-12)

    def test_entries_are_clipped(self):
        dom = DomainParams.air()
        targets = [TargetState((0.0, 0.0), (0.0, 0.0), 50.0, 0.0)] * 3
        obs = build_observation(VehicleState(4.9, 4.9, 0.0), targets, np.full(36, 10.0), dom)
        assert np.all(obs <= 1.0) and np.all(obs >= -1.0)

    def test_wrong_target_count(self):
        with pytest.raises(ShapeMismatchError):
            build_observation(VehicleState(0, 0, 0), [TargetState((0, 0), (0, 0), 0, 0)] * 2,
                              np.full(36, 10.0), DomainParams.air())

    def test_wrong_sector_count(self):
        with pytest.raises(ShapeMismatchError):
            build_observation(VehicleState(0, 0, 0), [TargetState((0, 0), (0, 0), 0, 0)] * 3,
                              np.full(35, 10.0), DomainParams.air())

    def test_same_width_in_air_and_water(self, env1_config):
        water = env1_config.model_copy(update={"domain": DomainParams.water()})
        assert MonitoringEnv(env1_config).reset(3).shape == MonitoringEnv(water).reset(3).shape == (49,)


class TestReset:
    def test_same_seed_same_observation(self, env2_config):
        a = MonitoringEnv(env2_config).reset(42)
        b = MonitoringEnv(env2_config).reset(42)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self, env1_config):
        env = MonitoringEnv(env1_config)
        assert not np.array_equal(env.reset(1), env.reset(2))

    def test_zero_initial_uncertainty(self, env1_config):
        config = env1_config.model_copy(update={"monitoring": MonitoringParams(sigma0_max=0.0)})
        env = MonitoringEnv(config)
        env.reset(9)
        assert np.all(env.sigmas == 0.0)

    def test_initial_uncertainty_bounds(self, env1_config):
        env = MonitoringEnv(env1_config)
        for seed in range(50):
            env.reset(seed)
            assert np.all((env.sigmas >= 0.0) & (env.sigmas <= 0.05))

    def test_no_initial_collisions_in_env2(self, env2_config):
        env = MonitoringEnv(env2_config)
        for seed in range(10_000):
            env.reset(seed)
            assert not env2_config.arena.collides(env.vehicle.x, env.vehicle.y, env2_config.collision_radius)

    def test_placement_failure(self, env1_config):
        config = env1_config.model_copy(update={"collision_radius": 6.0, "max_placement_draws": 10})
        with pytest.raises(PlacementError):
            MonitoringEnv(config).reset(0)


class TestStep:
    def test_step_before_reset(self, env1_config):
        with pytest.raises(EpisodeStateError):
            MonitoringEnv(env1_config).step([0.0, 0.0])

    def test_driving_into_wall(self, env1_config):
        env = MonitoringEnv(env1_config)
        env.reset(0)
        env.vehicle = VehicleState(x=4.5, y=0.0, heading=0.0, v=1.0)
        for _ in range(100):
            result = env.step([1.0, 0.0], EnvMode.EVAL)
            if result.terminated:
                break
        assert result.terminated and result.info.collided
        with pytest.raises(EpisodeStateError):
            env.step([0.0, 0.0])

    def test_train_mode_ends_on_visit(self, env1_config):
        env = MonitoringEnv(env1_config)
        env.reset(5)
        _park_near_target(env, 0)
        result = env.step([0.0, 0.0], EnvMode.TRAIN)
        assert result.terminated
        assert not result.info.collided
        assert result.info.resets_this_step >= 1
        assert 0 in result.info.visited
        assert result.reward > 9.0
        assert not result.info.truncated

    def test_eval_mode_continues_after_visit(self, env1_config):
        env = MonitoringEnv(env1_config)
        env.reset(5)
        _park_near_target(env, 0)
        result = env.step([0.0, 0.0], EnvMode.EVAL)
        assert not result.terminated
        assert result.info.per_target_sigma[0] == 0.0

    def test_horizon_truncates(self, env1_config):
        config = env1_config.model_copy(update={"horizon": 5})
        env = MonitoringEnv(config)
        env.reset(0)
        env.vehicle = VehicleState(0.0, 0.0, 0.0)
        results = [env.step([0.0, 0.0], EnvMode.EVAL) for _ in range(5)]
        assert [r.terminated for r in results] == [False] * 4 + [True]

    def test_uncertainty_dichotomy_under_random_actions(self, env2_config):
        env = MonitoringEnv(env2_config)
        rng = np.random.default_rng(0)
        lam = env2_config.monitoring.lambda_step
        steps = 0
        for seed in range(5):
            env.reset(seed)
            done = False
            while not done and steps < 4000:
                before = env.sigmas
                result = env.step(rng.uniform([0.0, -1.5], [1.0, 1.5]), EnvMode.EVAL)
                after = np.asarray(result.info.per_target_sigma)
                for s0, s1 in zip(before, after):
                    assert s1 == 0.0 or s1 == s0 + lam
                assert np.all(result.obs <= 1.0) and np.all(result.obs >= -1.0)
                if result.info.collided:
                    assert result.terminated
                done = result.terminated
                steps += 1

    def test_identical_actions_reproduce_trajectory(self, env2_config):
        actions = np.random.default_rng(1).uniform([0.0, -1.5], [1.0, 1.5], size=(200, 2))

        def rollout():
            env = MonitoringEnv(env2_config)
            observations = [env.reset(77)]
            for action in actions:
                result = env.step(action, EnvMode.EVAL)
                observations.append(result.obs)
                if result.terminated:
                    break
            return np.array(observations)

        np.testing.assert_array_equal(rollout(), rollout())

    def test_growth_without_visits(self, env1_config):
        env = MonitoringEnv(env1_config.model_copy(update={"monitoring": MonitoringParams(r_sense=0.01)}))
        env.reset(3)
        env.vehicle = VehicleState(0.0, 0.0, 0.0)
        start = env.sigmas
        for _ in range(100):
            env.step([0.0, 0.0], EnvMode.EVAL)
        np.testing.assert_allclose(env.sigmas, start + 100 * 0.001, atol=1e-12)


class TestTrace:
    def test_trace_export(self, env1_config, tmp_path):
        env = MonitoringEnv(env1_config, record_trace=True)
        env.reset(0)
        for _ in range(10):
            env.step([0.5, 0.1], EnvMode.EVAL)
        rows = env.export_trace(tmp_path / "trace.csv")
        lines = (tmp_path / "trace.csv").read_text().splitlines()
        assert rows == 11
        assert lines[0] == "step,x,y,heading,target1_x,target1_y,sigma_1,target2_x,target2_y,sigma_2," \
                           "target3_x,target3_y,sigma_3"
        assert len(lines) == 12
