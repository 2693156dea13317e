import threading
from dataclasses import dataclass

import numpy as np

from hydromonitor.errors import ReplayUnderflowError, ShapeMismatchError


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool


@dataclass(frozen=True)
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return self.rewards.shape[0]


class ReplayBuffer:
    """
    Fixed-capacity ring of transitions.

    push and sample hold a lock, so several producers and one consumer can
    share an instance.
    """

    def __init__(self, capacity: int, obs_width: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.obs_width = obs_width
        self.action_dim = action_dim
        self._obs = np.zeros((capacity, obs_width))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_width))
        self._dones = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0
        self.insertions = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return self._size

    def push(self, transition: Transition) -> None:
        obs = np.asarray(transition.obs, dtype=float)
        action = np.asarray(transition.action, dtype=float)
        if obs.shape != (self.obs_width,) or action.shape != (self.action_dim,):
            raise ShapeMismatchError(f"transition shapes {obs.shape}/{action.shape} do not fit the buffer")
        with self._lock:
            i = self._cursor
            self._obs[i] = obs
            self._actions[i] = action
            self._rewards[i] = transition.reward
            self._next_obs[i] = transition.next_obs
            self._dones[i] = transition.done
            self._cursor = (i + 1) % self.capacity
            self._size = min(self._size + 1, self.capacity)
            self.insertions += 1

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """
        Uniform sample with replacement.

        Raises:
            ReplayUnderflowError: fewer stored transitions than batch_size
        """
        with self._lock:
            if self._size < batch_size:
                raise ReplayUnderflowError(f"buffer holds {self._size} transitions, batch needs {batch_size}")
            idx = rng.integers(0, self._size, size=batch_size)
            return Batch(
                obs=self._obs[idx].copy(),
                actions=self._actions[idx].copy(),
                rewards=self._rewards[idx].copy(),
                next_obs=self._next_obs[idx].copy(),
                dones=self._dones[idx].copy(),
            )

