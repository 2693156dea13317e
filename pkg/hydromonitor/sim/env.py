import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from hydromonitor.errors import EpisodeStateError, PlacementError, ShapeMismatchError
from hydromonitor.sim.arena import ArenaSpec
from hydromonitor.sim.dynamics import DomainParams, VehicleState, ou_step, step_vehicle
from hydromonitor.sim.reward import RewardWeights, compute_reward
from hydromonitor.sim.sensors import SensorSpec, cast_rays
from hydromonitor.sim.targets import (
    MonitoringParams,
    TargetSpec,
    TargetState,
    lissajous_position,
    sample_target_spec,
    step_targets,
    update_uncertainty,
)
from hydromonitor.utils.io import write_csv

logger = logging.getLogger(__name__)


class EnvMode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


class EnvConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    arena: ArenaSpec = Field(default_factory=ArenaSpec)
    domain: DomainParams = Field(default_factory=DomainParams.air)
    monitoring: MonitoringParams = Field(default_factory=MonitoringParams)
    reward: RewardWeights = Field(default_factory=RewardWeights)
    horizon: int = 5000
    collision_radius: float = 0.3
    max_placement_draws: int = 1000


@dataclass
class StepInfo:
    resets_this_step: int
    collided: bool
    per_target_sigma: List[float]
    visited: List[int] = field(default_factory=list)
    truncated: bool = False


@dataclass
class StepResult:
    obs: np.ndarray
    reward: float
    terminated: bool
    info: StepInfo


@dataclass(frozen=True)
class ObservationView:
    """The unnormalized content of an observation, for hand-written policies."""

    vehicle: VehicleState
    est_positions: np.ndarray
    sigmas: np.ndarray
    scan: np.ndarray
    sensor: SensorSpec
    domain: DomainParams


def observation_width(n_targets: int, sectors: int) -> int:
    return 4 + 3 * n_targets + sectors


def build_observation(veh: VehicleState, targets: Sequence[TargetState], scan: np.ndarray,
                      dom: DomainParams, p: MonitoringParams = MonitoringParams(),
                      half_width: float = 5.0) -> np.ndarray:
    """
    Flatten pose, targets and scan into a vector with entries in [-1, 1].

    Layout: [x, y, sin, cos] ++ per target [forward, left, sigma] ++ sectors.
    Target offsets are expressed in the body frame and scaled by the arena
    side; sigmas by sigma_scale.
    """
    if len(targets) != p.n_targets:
        raise ShapeMismatchError(f"expected {p.n_targets} targets, got {len(targets)}")
    scan = np.asarray(scan, dtype=float)
    if scan.shape != (dom.sensor.sectors,):
        raise ShapeMismatchError(f"expected {dom.sensor.sectors} range sectors, got {scan.shape}")

    cos_h, sin_h = np.cos(veh.heading), np.sin(veh.heading)
    side = 2.0 * half_width
    obs = np.empty(observation_width(p.n_targets, dom.sensor.sectors))
    obs[0] = veh.x / half_width
    obs[1] = veh.y / half_width
    obs[2] = sin_h
    obs[3] = cos_h
    for i, target in enumerate(targets):
        rx = target.est_pos[0] - veh.x
        ry = target.est_pos[1] - veh.y
        base = 4 + 3 * i
        obs[base] = (cos_h * rx + sin_h * ry) / side
        obs[base + 1] = (-sin_h * rx + cos_h * ry) / side
        obs[base + 2] = target.sigma / p.sigma_scale
    obs[4 + 3 * p.n_targets:] = scan / dom.sensor.max_range
    return np.clip(obs, -1.0, 1.0)


def highest_uncertainty(sigmas: Sequence[float]) -> int:
    """Index of the largest sigma, lowest index on ties."""
    return int(np.argmax(np.asarray(sigmas, dtype=float)))


class MonitoringEnv:
    """
    Seeded single-vehicle persistent-monitoring episode.

    An instance is not safe for concurrent use; run one instance per worker.
    """

    def __init__(self, config: EnvConfig, record_trace: bool = False):
        self.config = config
        self.record_trace = record_trace
        self._sector_index = config.domain.sensor.sector_of_beams()
        self.rng: Optional[np.random.Generator] = None
        self.vehicle: Optional[VehicleState] = None
        self.specs: List[TargetSpec] = []
        self.targets: List[TargetState] = []
        self.drift = np.zeros(2)
        self.steps = 0
        self.done = True
        self.scan = np.full(config.domain.sensor.sectors, config.domain.sensor.max_range)
        self.trace: List[list] = []

    @property
    def obs_width(self) -> int:
        return observation_width(self.config.monitoring.n_targets, self.config.domain.sensor.sectors)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([t.sigma for t in self.targets])

    def reset(self, seed: int) -> np.ndarray:
        """
        Start a new episode; the same seed always yields the same initial state.

        Raises:
            PlacementError: no collision-free agent pose was found
        """
        cfg = self.config
        p = cfg.monitoring
        self.rng = np.random.default_rng(seed)

        self.specs = [sample_target_spec(self.rng) for _ in range(p.n_targets)]
        sigma0 = self.rng.uniform(0.0, p.sigma0_max, size=p.n_targets) if p.sigma0_max > 0 else np.zeros(p.n_targets)
        self.targets = []
        for spec, s0 in zip(self.specs, sigma0):
            pos = lissajous_position(spec, 0.0)
            est = pos
            if p.est_noise_std > 0:
                est = pos + self.rng.normal(0.0, p.est_noise_std, size=2)
            self.targets.append(TargetState(
                true_pos=(float(pos[0]), float(pos[1])),
                est_pos=(float(est[0]), float(est[1])),
                sigma=float(s0),
                curve_param=0.0,
            ))

        self.vehicle = self._place_vehicle()
        self.drift = np.array(cfg.domain.ou.mu, dtype=float) if cfg.domain.ou.enabled else np.zeros(2)
        self.steps = 0
        self.done = False
        self.scan = self._scan()
        self.trace = []
        if self.record_trace:
            self._record()
        return self.observe()

    def _place_vehicle(self) -> VehicleState:
        cfg = self.config
        hw = cfg.arena.half_width
        for _ in range(cfg.max_placement_draws):
            x, y = self.rng.uniform(-hw, hw, size=2)
            heading = self.rng.uniform(-np.pi, np.pi)
            if not cfg.arena.collides(x, y, cfg.collision_radius):
                return VehicleState(x=float(x), y=float(y), heading=float(heading))
        raise PlacementError(f"no collision-free pose after {cfg.max_placement_draws} draws")

    def _scan(self) -> np.ndarray:
        veh = self.vehicle
        return cast_rays(veh.x, veh.y, veh.heading, self.config.arena, self.config.domain.sensor,
                         sector_index=self._sector_index)

    def observe(self) -> np.ndarray:
        return build_observation(self.vehicle, self.targets, self.scan, self.config.domain,
                                 self.config.monitoring, self.config.arena.half_width)

    def view(self) -> ObservationView:
        return ObservationView(
            vehicle=self.vehicle,
            est_positions=np.array([t.est_pos for t in self.targets]),
            sigmas=self.sigmas,
            scan=self.scan.copy(),
            sensor=self.config.domain.sensor,
            domain=self.config.domain,
        )

    def step(self, action: Sequence[float], mode: EnvMode = EnvMode.TRAIN) -> StepResult:
        """
        Apply one control command.

        Raises:
            EpisodeStateError: the episode was never started or already ended
        """
        if self.vehicle is None:
            raise EpisodeStateError("step called before reset")
        if self.done:
            raise EpisodeStateError("step called after the episode terminated")
        cfg = self.config
        p = cfg.monitoring
        dom = cfg.domain

        goal = highest_uncertainty(self.sigmas)
        before = float(np.hypot(*(np.asarray(self.targets[goal].est_pos) - self.vehicle.position)))

        if dom.ou.enabled:
            self.drift = ou_step(self.drift, dom.ou, dom.dt, self.rng.standard_normal(2))
        self.vehicle = step_vehicle(self.vehicle, action, dom, self.drift)
        self.targets = step_targets(self.targets, self.specs, dom.dt, self.rng,
                                    p.est_noise_std, p.speed_jitter_std)

        position = self.vehicle.position
        visited = []
        updated = []
        for i, target in enumerate(self.targets):
            dist = float(np.hypot(*(np.asarray(target.true_pos) - position)))
            sigma = update_uncertainty(target.sigma, dist, p)
            if sigma == 0.0 and target.sigma > 0.0:
                visited.append(i)
            updated.append(TargetState(target.true_pos, target.est_pos, sigma, target.curve_param))
        self.targets = updated

        collided = cfg.arena.collides(self.vehicle.x, self.vehicle.y, cfg.collision_radius)
        after = float(np.hypot(*(np.asarray(self.targets[goal].est_pos) - position)))
        sigmas = [t.sigma for t in self.targets]
        reward = compute_reward(len(visited), sigmas, collided, before - after, cfg.reward)

        self.steps += 1
        timed_out = self.steps >= cfg.horizon
        terminated = collided or timed_out or (mode == EnvMode.TRAIN and len(visited) >= 1)
        self.done = terminated
        self.scan = self._scan()
        if self.record_trace:
            self._record()
        if collided:
            logger.debug("collision at step %d (%.2f, %.2f)", self.steps, self.vehicle.x, self.vehicle.y)

        info = StepInfo(
            resets_this_step=len(visited),
            collided=collided,
            per_target_sigma=sigmas,
            visited=visited,
            truncated=timed_out and not collided and not (mode == EnvMode.TRAIN and visited),
        )
        return StepResult(obs=self.observe(), reward=reward, terminated=terminated, info=info)

    def _record(self) -> None:
        veh = self.vehicle
        row = [self.steps, veh.x, veh.y, veh.heading]
        for target in self.targets:
            row.extend([target.true_pos[0], target.true_pos[1], target.sigma])
        self.trace.append(row)

    def trace_header(self) -> List[str]:
        header = ["step", "x", "y", "heading"]
        for i in range(1, self.config.monitoring.n_targets + 1):
            header.extend([f"target{i}_x", f"target{i}_y", f"sigma_{i}"])
        return header

    def export_trace(self, path: Union[str, Path]) -> int:
        """Write the recorded trajectory as CSV; returns the number of rows."""
        return write_csv(path, self.trace_header(), self.trace)
