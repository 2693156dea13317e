from typing import Sequence

from pydantic import BaseModel, ConfigDict, model_validator


class RewardWeights(BaseModel):
    """
    Per-step reward weights.

    Only the visit bonus comes from the monitoring task itself; the collision
    penalty, uncertainty cost and progress shaping are additions, each
    disabled by setting its weight to zero.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    visit: float = 10.0
    collision: float = 10.0
    uncertainty: float = 0.01
    progress: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "RewardWeights":
        if min(self.visit, self.collision, self.uncertainty, self.progress) < 0:
            raise ValueError("reward weights must be >= 0")
        return self


def compute_reward(resets: int, sigmas: Sequence[float], collided: bool, progress: float,
                   weights: RewardWeights = RewardWeights()) -> float:
    reward = weights.visit * resets
    if collided:
        reward -= weights.collision
    reward -= weights.uncertainty * float(sum(sigmas))
    reward += weights.progress * progress
    return float(reward)
