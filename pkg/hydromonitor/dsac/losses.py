"""
Losses of the distributional soft actor-critic and their gradients.

Critic: quantile Huber regression of every predicted quantile against every
target quantile. Actor: entropy-regularized objective on the smaller of the
two critic means, differentiated through the reparameterized action.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from hydromonitor.dsac.actor import Actor, actor_backward, policy_sample
from hydromonitor.dsac.critic import QuantileCritic, critic_quantiles
from hydromonitor.dsac.replay import Batch
from hydromonitor.nn.network import Gradients, backward


def huber(u: np.ndarray, kappa: float) -> np.ndarray:
    abs_u = np.abs(u)
    return np.where(abs_u <= kappa, 0.5 * u * u, kappa * (abs_u - 0.5 * kappa))


def quantile_huber(u: np.ndarray, tau: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    """|tau - 1{u < 0}| * L_kappa(u), elementwise with broadcasting."""
    u = np.asarray(u, dtype=float)
    return np.abs(tau - (u < 0.0)) * huber(u, kappa)


def quantile_huber_grad(u: np.ndarray, tau: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    """Derivative of quantile_huber with respect to u."""
    return np.abs(tau - (u < 0.0)) * np.clip(u, -kappa, kappa)


def select_min_mean(quantile_sets: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per row, the quantile vector whose mean is smallest.

    Returns:
        (selected quantiles (batch, N), index of the chosen set per row)
    """
    stacked = np.stack(quantile_sets)
    choice = np.argmin(stacked.mean(axis=2), axis=0)
    rows = np.arange(stacked.shape[1])
    return stacked[choice, rows], choice


def compute_targets(target_critics: Sequence[QuantileCritic], actor: Actor, batch: Batch, gamma: float,
                    alpha: float, entropy_in_target: bool, rng: Optional[np.random.Generator] = None,
                    noise: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Target quantiles y_j = r + (1 - done) * gamma * (z'_j - alpha * log pi(a'|s')).

    a' is sampled fresh from the current actor at s'; z' comes from the target
    critic whose mean is smaller for that row. Targets are constants for the
    critic update.
    """
    nxt = policy_sample(actor, batch.next_obs, rng, noise=noise)
    z_next = [critic_quantiles(critic, batch.next_obs, nxt.action)[0] for critic in target_critics]
    z_sel, _ = select_min_mean(z_next)
    if entropy_in_target:
        z_sel = z_sel - alpha * nxt.log_prob[:, None]
    bootstrap = (1.0 - batch.dones.astype(float))[:, None] * gamma * z_sel
    return batch.rewards[:, None] + bootstrap


def critic_loss(critic: QuantileCritic, targets: np.ndarray, batch: Batch,
                kappa: float = 1.0) -> Tuple[float, Gradients, np.ndarray]:
    """
    (1/N) sum_i sum_j rho_{tau_i}(y_j - z_i), averaged over the batch.

    Returns:
        (loss, parameter gradients, predicted quantiles)
    """
    z, cache = critic_quantiles(critic, batch.obs, batch.actions)
    n_batch, n = z.shape
    tau = critic.fractions[None, :, None]
    # u[b, i, j] = y[b, j] - z[b, i]
    u = targets[:, None, :] - z[:, :, None]
    loss = float(quantile_huber(u, tau, kappa).sum() / (n * n_batch))
    d_z = -quantile_huber_grad(u, tau, kappa).sum(axis=2) / (n * n_batch)
    return loss, backward(critic.net, cache, d_z), z


def actor_loss(actor: Actor, critics: Sequence[QuantileCritic], obs: np.ndarray, alpha: float,
               rng: Optional[np.random.Generator] = None,
               noise: Optional[np.ndarray] = None) -> Tuple[float, Gradients, np.ndarray]:
    """
    E[alpha * log pi(a|s) - min_i Q_i(s, a)] with a reparameterized.

    Returns:
        (loss, actor gradients, log-probs of the sampled actions)
    """
    sample = policy_sample(actor, obs, rng, noise=noise)
    n_batch = sample.action.shape[0]
    forwards = [critic_quantiles(critic, obs, sample.action) for critic in critics]
    q_values = np.stack([z.mean(axis=1) for z, _ in forwards])
    choice = np.argmin(q_values, axis=0)
    q_min = q_values[choice, np.arange(n_batch)]
    loss = float(np.mean(alpha * sample.log_prob - q_min))

    d_action = np.zeros_like(sample.action)
    for k, (critic, (z, cache)) in enumerate(zip(critics, forwards)):
        weight = np.where(choice == k, -1.0 / n_batch, 0.0)
        if not np.any(weight):
            continue
        d_z = np.repeat(weight[:, None] / critic.n_quantiles, critic.n_quantiles, axis=1)
        input_grad = backward(critic.net, cache, d_z).input_grad
        d_action += input_grad[:, critic.obs_width:] / critic.bounds.scale
    d_log_prob = np.full(n_batch, alpha / n_batch)
    grads = actor_backward(actor, sample, d_action, d_log_prob)
    return loss, grads, sample.log_prob
