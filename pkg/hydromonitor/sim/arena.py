from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class EnvId(str, Enum):
    ENV1 = "env1"
    ENV2 = "env2"


class Obstacle(BaseModel):
    """Vertical cylinder seen as a circle in the plane."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    center: Tuple[float, float]
    radius: float

    @field_validator("radius")
    @classmethod
    def _positive_radius(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("obstacle radius must be > 0")
        return value


class ArenaSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    env_id: EnvId = EnvId.ENV1
    half_width: float = 5.0
    obstacles: List[Obstacle] = []

    @model_validator(mode="after")
    def _check_layout(self) -> "ArenaSpec":
        if self.half_width <= 0:
            raise ValueError("half_width must be > 0")
        expected = 0 if self.env_id == EnvId.ENV1 else 4
        if len(self.obstacles) != expected:
            raise ValueError(f"{self.env_id.value} needs exactly {expected} obstacles, got {len(self.obstacles)}")
        for obs in self.obstacles:
            cx, cy = obs.center
            if max(abs(cx), abs(cy)) + obs.radius >= self.half_width:
                raise ValueError(f"obstacle at {obs.center} is not strictly inside the arena")
        for i, a in enumerate(self.obstacles):
            for b in self.obstacles[i + 1:]:
                gap = np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
                if gap <= a.radius + b.radius:
                    raise ValueError(f"obstacles at {a.center} and {b.center} overlap")
        return self

    @classmethod
    def preset(cls, env_id: EnvId, obstacle_radius: float = 0.4, obstacle_offset: float = 2.5) -> "ArenaSpec":
        """Env1 is the empty 10 m tank; Env2 adds four risers at (±offset, ±offset)."""
        env_id = EnvId(env_id)
        if env_id == EnvId.ENV1:
            return cls(env_id=env_id)
        obstacles = [
            Obstacle(center=(sx * obstacle_offset, sy * obstacle_offset), radius=obstacle_radius)
            for sx in (-1.0, 1.0)
            for sy in (-1.0, 1.0)
        ]
        return cls(env_id=env_id, obstacles=obstacles)

    def clearance(self, x: float, y: float) -> float:
        """Distance from a point to the nearest wall or obstacle surface."""
        best = self.half_width - max(abs(x), abs(y))
        for obs in self.obstacles:
            best = min(best, float(np.hypot(x - obs.center[0], y - obs.center[1])) - obs.radius)
        return best

    def collides(self, x: float, y: float, collision_radius: float) -> bool:
        return self.clearance(x, y) <= collision_radius
