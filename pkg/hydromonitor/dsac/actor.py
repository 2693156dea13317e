"""
Squashed-Gaussian actor.

The network emits a mean and a log-std per action dimension; a sample
u ~ N(mean, std) is squashed with tanh and rescaled into the action box.
log-probabilities include the tanh and the affine change of variables, so
they are densities over the actual commands.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from hydromonitor.errors import ShapeMismatchError
from hydromonitor.nn.network import ForwardCache, Gradients, NetworkParams, backward, forward

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class ActionBounds:
    low: np.ndarray
    high: np.ndarray

    @classmethod
    def of(cls, low: Sequence[float], high: Sequence[float]) -> "ActionBounds":
        low = np.asarray(low, dtype=float)
        high = np.asarray(high, dtype=float)
        if low.shape != high.shape or np.any(high <= low):
            raise ShapeMismatchError(f"invalid action bounds {low} .. {high}")
        return cls(low=low, high=high)

    @property
    def dim(self) -> int:
        return self.low.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.high + self.low)

    @property
    def scale(self) -> np.ndarray:
        return 0.5 * (self.high - self.low)

    def normalize(self, action: np.ndarray) -> np.ndarray:
        """Map commands into [-1, 1] per dimension."""
        return (np.asarray(action, dtype=float) - self.center) / self.scale


@dataclass(frozen=True)
class Actor:
    net: NetworkParams
    bounds: ActionBounds

    def __post_init__(self):
        if self.net.out_width != 2 * self.bounds.dim:
            raise ShapeMismatchError(
                f"actor emits {self.net.out_width} values, needs {2 * self.bounds.dim} (mean and log-std)"
            )

    @property
    def obs_width(self) -> int:
        return self.net.in_width

    @property
    def action_dim(self) -> int:
        return self.bounds.dim


@dataclass
class PolicySample:
    """Everything a reparameterized gradient needs to flow back into the actor."""

    action: np.ndarray
    log_prob: np.ndarray
    u: np.ndarray
    noise: np.ndarray
    squashed: np.ndarray
    std: np.ndarray
    clipped: np.ndarray
    cache: ForwardCache


def squash_log_det(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), evaluated stably."""
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


def gaussian_log_prob(u: np.ndarray, mean: np.ndarray, log_std: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Density of the squashed, rescaled action whose pre-squash value is u."""
    z = (u - mean) / np.exp(log_std)
    per_dim = -0.5 * z * z - log_std - _HALF_LOG_2PI - squash_log_det(u) - np.log(scale)
    return per_dim.sum(axis=-1)


def policy_sample(actor: Actor, obs: np.ndarray, rng: Optional[np.random.Generator] = None,
                  noise: Optional[np.ndarray] = None, deterministic: bool = False) -> PolicySample:
    """
    Reparameterized sample for a (batch, obs_width) matrix.

    Pass `noise` to fix the standard-normal draw (finite-difference checks);
    `deterministic` uses the mean.
    """
    obs = np.atleast_2d(np.asarray(obs, dtype=float))
    if obs.shape[1] != actor.obs_width:
        raise ShapeMismatchError(f"observation width {obs.shape[1]} != actor width {actor.obs_width}")
    out, cache = forward(actor.net, obs)
    dim = actor.action_dim
    mean = out[:, :dim]
    raw_log_std = out[:, dim:]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    clipped = (raw_log_std < LOG_STD_MIN) | (raw_log_std > LOG_STD_MAX)
    std = np.exp(log_std)

    if deterministic:
        noise = np.zeros_like(mean)
    elif noise is None:
        noise = rng.standard_normal(mean.shape)
    u = mean + std * noise
    squashed = np.tanh(u)
    scale = actor.bounds.scale
    action = actor.bounds.center + scale * squashed
    action = np.clip(action, actor.bounds.low, actor.bounds.high)
    log_prob = gaussian_log_prob(u, mean, log_std, scale)
    return PolicySample(action=action, log_prob=log_prob, u=u, noise=noise, squashed=squashed,
                        std=std, clipped=clipped, cache=cache)


def sample_action(actor: Actor, obs: np.ndarray, rng: Optional[np.random.Generator] = None,
                  deterministic: bool = False) -> Tuple[np.ndarray, float]:
    """Single-observation convenience wrapper: (action, log_prob)."""
    sample = policy_sample(actor, np.asarray(obs, dtype=float)[None, :], rng, deterministic=deterministic)
    return sample.action[0], float(sample.log_prob[0])


def actor_backward(actor: Actor, sample: PolicySample, d_action: np.ndarray, d_log_prob: np.ndarray) -> Gradients:
    """
    Chain upstream gradients with respect to actions and log-probs back to the
    actor parameters through the reparameterized path.
    """
    scale = actor.bounds.scale
    t = sample.squashed
    d_log_prob = np.asarray(d_log_prob, dtype=float)[:, None]
    # d log_prob / du = 2 tanh(u); d action / du = scale (1 - tanh^2)
    d_u = d_action * scale * (1.0 - t * t) + d_log_prob * 2.0 * t
    d_mean = d_u
    d_log_std = d_u * sample.std * sample.noise - d_log_prob
    d_log_std = np.where(sample.clipped, 0.0, d_log_std)
    return backward(actor.net, sample.cache, np.concatenate([d_mean, d_log_std], axis=1))
