from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hydromonitor.sim.sensors import SensorSpec


class Domain(str, Enum):
    AIR = "air"
    WATER = "water"


class OUParams(BaseModel):
    """Ornstein-Uhlenbeck drift modelling wind (air) or current (water)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    theta: float = 0.5
    mu: Tuple[float, float] = (0.0, 0.0)
    sigma: float = 0.05
    enabled: bool = True

    @model_validator(mode="after")
    def _check(self) -> "OUParams":
        if self.theta < 0 or self.sigma < 0:
            raise ValueError("OU theta and sigma must be >= 0")
        return self


class DomainParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    domain: Domain = Domain.AIR
    dt: float = 0.05
    tau_v: float = 0.3
    tau_w: float = 0.2
    v_max: float = 1.0
    w_max: float = 1.5
    ou: OUParams = Field(default_factory=OUParams)
    sensor: SensorSpec = Field(default_factory=SensorSpec.lidar)

    @model_validator(mode="after")
    def _check(self) -> "DomainParams":
        for name in ("dt", "tau_v", "tau_w", "v_max", "w_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        return self

    @classmethod
    def air(cls, sectors: int = 36) -> "DomainParams":
        return cls(
            domain=Domain.AIR, tau_v=0.3, tau_w=0.2, v_max=1.0, w_max=1.5,
            ou=OUParams(theta=0.5, sigma=0.05), sensor=SensorSpec.lidar(sectors),
        )

    @classmethod
    def water(cls, sectors: int = 36) -> "DomainParams":
        return cls(
            domain=Domain.WATER, tau_v=1.2, tau_w=0.8, v_max=0.5, w_max=0.8,
            ou=OUParams(theta=0.5, sigma=0.02), sensor=SensorSpec.sonar(sectors),
        )

    @classmethod
    def preset(cls, domain: Domain, sectors: int = 36) -> "DomainParams":
        return cls.air(sectors) if Domain(domain) == Domain.AIR else cls.water(sectors)

    def action_low(self) -> np.ndarray:
        return np.array([0.0, -self.w_max])

    def action_high(self) -> np.ndarray:
        return np.array([self.v_max, self.w_max])


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    v: float = 0.0
    w: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


def wrap_angle(angle: float) -> float:
    """Wrap to (-π, π]."""
    if -np.pi < angle <= np.pi:
        return float(angle)
    return float(np.pi - np.mod(np.pi - angle, 2.0 * np.pi))


def step_vehicle(state: VehicleState, action: Sequence[float], dom: DomainParams,
                 disturbance: Sequence[float] = (0.0, 0.0)) -> VehicleState:
    """
    Advance the closed-loop unicycle by one control step.

    Realized velocities follow the commands through first-order lags whose
    time constants encode the medium; the pose integrates the new speed along
    the current heading plus the additive drift.
    """
    v_cmd = float(np.clip(action[0], 0.0, dom.v_max))
    w_cmd = float(np.clip(action[1], -dom.w_max, dom.w_max))
    gain_v = min(dom.dt / dom.tau_v, 1.0)
    gain_w = min(dom.dt / dom.tau_w, 1.0)
    v = state.v + gain_v * (v_cmd - state.v)
    w = state.w + gain_w * (w_cmd - state.w)

    x = state.x + dom.dt * (v * np.cos(state.heading) + disturbance[0])
    y = state.y + dom.dt * (v * np.sin(state.heading) + disturbance[1])
    heading = wrap_angle(state.heading + dom.dt * w)
    return VehicleState(x=float(x), y=float(y), heading=heading, v=float(v), w=float(w))


def ou_step(d: np.ndarray, p: OUParams, dt: float, noise: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama step: d' = d + θ(μ − d)dt + σ√dt·noise."""
    d = np.asarray(d, dtype=float)
    mu = np.asarray(p.mu, dtype=float)
    return d + p.theta * (mu - d) * dt + p.sigma * np.sqrt(dt) * np.asarray(noise, dtype=float)
