from pathlib import Path
from typing import Optional, Protocol, Union

import numpy as np

from hydromonitor.baseline.bug2 import Bug2Policy
from hydromonitor.dsac.actor import Actor, sample_action
from hydromonitor.dsac.agent import DSACAgent
from hydromonitor.errors import ConfigError
from hydromonitor.nn.checkpoint import check_expected, load_checkpoint, read_header
from hydromonitor.sim.env import ObservationView


class Policy(Protocol):
    name: str
    obs_width: Optional[int]

    def reset(self) -> None:
        ...

    def act(self, obs: np.ndarray, view: ObservationView) -> np.ndarray:
        ...


class DSACPolicy:
    """Learned actor evaluated at its distribution mean."""

    name = "dsac"

    def __init__(self, actor: Actor):
        self.actor = actor
        self.obs_width = actor.obs_width

    @classmethod
    def from_checkpoint(cls, path: Union[str, Path], obs_width: Optional[int] = None) -> "DSACPolicy":
        """
        Raises:
            CheckpointError: malformed file, or obs_width differs from the header
        """
        expect = {"obs_width": obs_width} if obs_width is not None else None
        # the header alone settles width mismatches before any network is decoded
        check_expected(read_header(path), expect)
        return cls(DSACAgent.from_checkpoint(load_checkpoint(path, expect)).actor)

    def reset(self) -> None:
        pass

    def act(self, obs: np.ndarray, view: ObservationView) -> np.ndarray:
        action, _ = sample_action(self.actor, obs, deterministic=True)
        return action


class StationaryPolicy:
    """Zero commands; the vehicle only drifts with the disturbance."""

    name = "stationary"
    obs_width = None

    def reset(self) -> None:
        pass

    def act(self, obs: np.ndarray, view: ObservationView) -> np.ndarray:
        return np.zeros(2)


def make_policy(kind: str, checkpoint: Optional[Union[str, Path]] = None,
                obs_width: Optional[int] = None) -> Policy:
    if kind == "bug2":
        return Bug2Policy()
    if kind == "stationary":
        return StationaryPolicy()
    if kind == "dsac_checkpoint":
        if checkpoint is None:
            raise ConfigError("policy dsac_checkpoint needs a checkpoint path")
        return DSACPolicy.from_checkpoint(checkpoint, obs_width)
    raise ConfigError(f"unknown policy kind {kind!r}")
