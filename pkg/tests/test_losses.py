import numpy as np
import pytest

from conftest import constant_critic, numeric_grad, relative_error
from hydromonitor.dsac.actor import policy_sample
from hydromonitor.dsac.critic import critic_quantiles, quantile_fractions
from hydromonitor.dsac.losses import (
    actor_loss,
    compute_targets,
    critic_loss,
    huber,
    quantile_huber,
    select_min_mean,
)
from hydromonitor.dsac.replay import Batch


def _batch(rng, size=4, obs_width=5, dones=None):
    return Batch(
        obs=rng.uniform(-1, 1, (size, obs_width)),
        actions=rng.uniform([0.0, -1.5], [1.0, 1.5], (size, 2)),
        rewards=rng.standard_normal(size),
        next_obs=rng.uniform(-1, 1, (size, obs_width)),
        dones=np.zeros(size, dtype=bool) if dones is None else np.asarray(dones),
    )


class TestQuantileHuber:
    def test_matches_elementwise_definition(self, rng):
        u = rng.standard_normal(1000) * 2.0
        tau = rng.uniform(0, 1, 1000)
        expected = []
        for ui, ti in zip(u, tau):
            h = 0.5 * ui ** 2 if abs(ui) <= 1.0 else abs(ui) - 0.5
            expected.append(abs(ti - (1.0 if ui < 0 else 0.0)) * h)
        np.testing.assert_allclose(quantile_huber(u, tau, 1.0), expected, rtol=1e-12)

    def test_huber_regions(self):
        np.testing.assert_allclose(huber(np.array([0.5, -3.0]), 1.0), [0.125, 2.5])

    def test_asymmetry(self):
        assert quantile_huber(np.array(1.0), 0.9) == pytest.approx(0.45)
        assert quantile_huber(np.array(-1.0), 0.9) == pytest.approx(0.05)

    def test_non_negative_and_zero_only_at_zero_residual(self, rng):
        u = rng.standard_normal(1000) * 3.0
        u[::7] = 0.0
        tau = rng.uniform(0.01, 0.99, 1000)
        loss = quantile_huber(u, tau, 1.0)
        assert np.all(loss >= 0.0)
        np.testing.assert_array_equal(loss == 0.0, u == 0.0)


class TestCriticLoss:
    def test_matches_double_sum(self, rng, small_critics):
        critic = small_critics[0]
        batch = _batch(rng)
        targets = rng.standard_normal((4, 6)) * 3.0
        loss, _, z = critic_loss(critic, targets, batch, kappa=1.0)
        tau = quantile_fractions(6)
        total = 0.0
        for b in range(4):
            for i in range(6):
                for j in range(6):
                    total += float(quantile_huber(np.array(targets[b, j] - z[b, i]), tau[i], 1.0))
        assert loss == pytest.approx(total / (6 * 4), rel=1e-12)

    def test_gradient_matches_finite_differences(self, rng, small_critics):
        critic = small_critics[0]
        batch = _batch(rng)
        targets = rng.standard_normal((4, 6))
        _, grads, _ = critic_loss(critic, targets, batch)
        numeric = numeric_grad(lambda: critic_loss(critic, targets, batch)[0], critic.net.arrays())
        assert relative_error(grads.arrays(), numeric) < 1e-3

    def test_zero_when_quantiles_hit_targets(self, rng, air_bounds):
        critic = constant_critic(5, air_bounds, [1.0, 1.0, 1.0], rng)
        loss, _, _ = critic_loss(critic, np.ones((4, 3)), _batch(rng))
        assert loss == 0.0


class TestTargets:
    def test_select_min_mean(self):
        a = np.array([[1.0, 2.0, 3.0], [9.0, 9.0, 9.0]])
        b = np.array([[0.0, 5.0, 6.0], [0.0, 0.0, 0.0]])
        selected, choice = select_min_mean([a, b])
        np.testing.assert_array_equal(choice, [0, 1])
        np.testing.assert_array_equal(selected, [[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])

    def test_bootstrap_from_smaller_mean(self, rng, small_actor, air_bounds):
        critics = [constant_critic(5, air_bounds, [1.0, 2.0, 3.0], rng),
                   constant_critic(5, air_bounds, [0.0, 5.0, 6.0], rng)]
        batch = _batch(rng, dones=[False, True, False, True])
        y = compute_targets(critics, small_actor, batch, gamma=0.9, alpha=0.0, entropy_in_target=True, rng=rng)
        for b in range(4):
            expected = batch.rewards[b] + (0.0 if batch.dones[b] else 0.9 * np.array([1.0, 2.0, 3.0]))
            np.testing.assert_allclose(y[b], expected, atol=1e-12)

    def test_entropy_term(self, rng, small_actor, air_bounds):
        critics = [constant_critic(5, air_bounds, [1.0, 2.0], rng)] * 2
        batch = _batch(rng)
        noise = rng.standard_normal((4, 2))
        log_prob = policy_sample(small_actor, batch.next_obs, noise=noise).log_prob
        y = compute_targets(critics, small_actor, batch, 0.9, 0.5, True, noise=noise)
        expected = batch.rewards[:, None] + 0.9 * (np.array([1.0, 2.0])[None, :] - 0.5 * log_prob[:, None])
        np.testing.assert_allclose(y, expected, atol=1e-12)
        plain = compute_targets(critics, small_actor, batch, 0.9, 0.5, False, noise=noise)
        np.testing.assert_allclose(plain, batch.rewards[:, None] + 0.9 * np.array([1.0, 2.0]), atol=1e-12)

    def test_single_quantile_without_entropy_is_scalar_bellman(self, rng, small_actor, air_bounds):
        targets_critics = [constant_critic(5, air_bounds, [0.7], rng), constant_critic(5, air_bounds, [0.4], rng)]
        batch = _batch(rng, dones=[False, True, False, False])
        y = compute_targets(targets_critics, small_actor, batch, 0.9, 0.5, False, rng=rng)
        assert y.shape == (4, 1)
        np.testing.assert_allclose(y[:, 0], batch.rewards + 0.9 * 0.4 * ~batch.dones, atol=1e-12)

        # one quantile at fraction 1/2 inside the quadratic region: a quarter of the squared error
        online = constant_critic(5, air_bounds, [0.2], rng)
        loss, _, _ = critic_loss(online, y, batch, kappa=100.0)
        assert loss == pytest.approx(0.25 * np.mean((y[:, 0] - 0.2) ** 2), rel=1e-12)


class TestActorLoss:
    def test_gradient_matches_finite_differences(self, rng, small_actor, small_critics):
        obs = rng.uniform(-1, 1, (6, 5))
        noise = rng.standard_normal((6, 2))
        _, grads, _ = actor_loss(small_actor, small_critics, obs, 0.2, noise=noise)
        numeric = numeric_grad(lambda: actor_loss(small_actor, small_critics, obs, 0.2, noise=noise)[0],
                               small_actor.net.arrays())
        assert relative_error(grads.arrays(), numeric) < 1e-3

    def test_value_uses_smaller_critic(self, rng, small_actor, air_bounds):
        critics = [constant_critic(5, air_bounds, [4.0, 4.0], rng), constant_critic(5, air_bounds, [1.0, 3.0], rng)]
        obs = rng.uniform(-1, 1, (3, 5))
        noise = rng.standard_normal((3, 2))
        loss, _, log_prob = actor_loss(small_actor, critics, obs, 0.1, noise=noise)
        assert loss == pytest.approx(float(np.mean(0.1 * log_prob - 2.0)))

    def test_critic_sees_sampled_action(self, rng, small_actor, small_critics):
        obs = rng.uniform(-1, 1, (2, 5))
        noise = rng.standard_normal((2, 2))
        sample = policy_sample(small_actor, obs, noise=noise)
        z, _ = critic_quantiles(small_critics[0], obs, sample.action)
        assert z.shape == (2, 6)
