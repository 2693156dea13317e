from dataclasses import dataclass
from typing import Tuple

import numpy as np

from hydromonitor.dsac.actor import ActionBounds
from hydromonitor.errors import ShapeMismatchError
from hydromonitor.nn.network import ForwardCache, NetworkParams, forward


def quantile_fractions(n: int) -> np.ndarray:
    """Midpoint fractions (2i - 1) / 2N, i = 1..N."""
    return (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)


@dataclass(frozen=True)
class QuantileCritic:
    """Maps (observation, normalized action) to N return quantiles."""

    net: NetworkParams
    bounds: ActionBounds

    @property
    def n_quantiles(self) -> int:
        return self.net.out_width

    @property
    def fractions(self) -> np.ndarray:
        return quantile_fractions(self.n_quantiles)

    @property
    def obs_width(self) -> int:
        return self.net.in_width - self.bounds.dim

    def inputs(self, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        action = np.atleast_2d(np.asarray(action, dtype=float))
        if obs.shape[1] != self.obs_width or action.shape[1] != self.bounds.dim:
            raise ShapeMismatchError(
                f"critic expects obs width {self.obs_width} and action width {self.bounds.dim}, "
                f"got {obs.shape[1]} and {action.shape[1]}"
            )
        return np.concatenate([obs, self.bounds.normalize(action)], axis=1)


def critic_quantiles(critic: QuantileCritic, obs: np.ndarray, action: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    return forward(critic.net, critic.inputs(obs, action))


def critic_mean(critic: QuantileCritic, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
    """Expected return: the mean of the predicted quantiles, one value per row."""
    z, _ = critic_quantiles(critic, obs, action)
    return z.mean(axis=-1)
