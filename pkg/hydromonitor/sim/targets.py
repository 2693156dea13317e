"""
Mobile targets on Lissajous paths and their linear uncertainty model.

Targets travel their curve at a constant arc-length speed: the curve
parameter is integrated from dt/ds = speed / |P'(t)| with RK4 sub-steps.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

SPEED_RANGE = (0.1, 0.25)
AMPLITUDE_RANGE = (2.0, 5.0)

# smallest |P'| used in the parameter ODE; keeps steps finite at cusps
_MIN_TANGENT = 1e-3


class TargetSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    A: float
    B: float
    a: int = 2
    b: int = 2
    phi: float = 0.0
    psi: float = 0.0
    speed: float = 0.1

    @model_validator(mode="after")
    def _check(self) -> "TargetSpec":
        lo, hi = AMPLITUDE_RANGE
        if not (lo <= self.A <= hi and lo <= self.B <= hi):
            raise ValueError(f"amplitudes must lie in [{lo}, {hi}]")
        if self.a != 2 or self.b != 2:
            raise ValueError("both curve frequencies must be 2")
        lo, hi = SPEED_RANGE
        if not lo <= self.speed <= hi:
            raise ValueError(f"speed must lie in [{lo}, {hi}]")
        return self


class MonitoringParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_targets: int = 3
    r_sense: float = 1.0
    lambda_step: float = 0.001
    sigma0_max: float = 0.05
    est_noise_std: float = 0.0
    speed_jitter_std: float = 0.0
    sigma_scale: float = 5.0

    @model_validator(mode="after")
    def _check(self) -> "MonitoringParams":
        if self.n_targets < 1:
            raise ValueError("n_targets must be >= 1")
        if self.r_sense <= 0 or self.lambda_step <= 0 or self.sigma_scale <= 0:
            raise ValueError("r_sense, lambda_step and sigma_scale must be > 0")
        if self.est_noise_std < 0 or self.speed_jitter_std < 0 or self.sigma0_max < 0:
            raise ValueError("noise levels and sigma0_max must be >= 0")
        return self


@dataclass(frozen=True)
class TargetState:
    true_pos: Tuple[float, float]
    est_pos: Tuple[float, float]
    sigma: float
    curve_param: float


def lissajous_position(spec: TargetSpec, t: float) -> np.ndarray:
    return np.array([
        spec.A * math.sin(spec.a * t + spec.phi),
        spec.B * math.sin(spec.b * t + spec.psi),
    ])


def curve_period(spec: TargetSpec) -> float:
    return 2.0 * math.pi / math.gcd(spec.a, spec.b)


def _param_rate(spec: TargetSpec, t: float, speed: float) -> float:
    dx = spec.A * spec.a * math.cos(spec.a * t + spec.phi)
    dy = spec.B * spec.b * math.cos(spec.b * t + spec.psi)
    return speed / max(math.hypot(dx, dy), _MIN_TANGENT)


def advance_param(spec: TargetSpec, t: float, speed: float, dt: float, substeps: int = 4) -> float:
    """Move the curve parameter so the target covers speed·dt of arc length."""
    if speed == 0.0:
        return t
    h = dt / substeps
    for _ in range(substeps):
        k1 = _param_rate(spec, t, speed)
        k2 = _param_rate(spec, t + 0.5 * h * k1, speed)
        k3 = _param_rate(spec, t + 0.5 * h * k2, speed)
        k4 = _param_rate(spec, t + h * k3, speed)
        t += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return t


def step_targets(targets: Sequence[TargetState], specs: Sequence[TargetSpec], dt: float,
                 rng: Optional[np.random.Generator] = None, est_noise_std: float = 0.0,
                 speed_jitter_std: float = 0.0) -> List[TargetState]:
    """
    Advance every target along its path by one step.

    The generator is only drawn from when estimate noise or speed jitter is
    enabled.
    """
    stepped = []
    for state, spec in zip(targets, specs):
        speed = spec.speed
        if speed_jitter_std > 0 and rng is not None:
            speed = float(np.clip(speed + rng.normal(0.0, speed_jitter_std), *SPEED_RANGE))
        param = advance_param(spec, state.curve_param, speed, dt)
        pos = lissajous_position(spec, param)
        est = pos
        if est_noise_std > 0 and rng is not None:
            est = pos + rng.normal(0.0, est_noise_std, size=2)
        stepped.append(replace(
            state,
            true_pos=(float(pos[0]), float(pos[1])),
            est_pos=(float(est[0]), float(est[1])),
            curve_param=param,
        ))
    return stepped


def update_uncertainty(sigma: float, dist: float, p: MonitoringParams) -> float:
    """Reset inside the sensing radius, otherwise grow by one step of λ."""
    if dist <= p.r_sense:
        return 0.0
    return sigma + p.lambda_step


def sample_target_spec(rng: np.random.Generator) -> TargetSpec:
    return TargetSpec(
        A=float(rng.uniform(*AMPLITUDE_RANGE)),
        B=float(rng.uniform(*AMPLITUDE_RANGE)),
        phi=float(rng.uniform(0.0, 2.0 * math.pi)),
        psi=float(rng.uniform(0.0, 2.0 * math.pi)),
        speed=float(rng.uniform(*SPEED_RANGE)),
    )
