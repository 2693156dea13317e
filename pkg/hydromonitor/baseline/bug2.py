"""
Bug2-style reactive baseline driven by range sectors only.

Motion-to-goal steers proportionally toward the goal. An obstacle inside the
forward cone starts boundary following along the m-line's blocking surface,
keeping it on one side at a fixed clearance. The robot leaves the boundary
once it meets the m-line again strictly closer to the goal than where it
hit the obstacle.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from hydromonitor.sim.dynamics import DomainParams, VehicleState, wrap_angle
from hydromonitor.sim.env import ObservationView, highest_uncertainty
from hydromonitor.sim.sensors import SensorSpec


class Bug2Mode(str, Enum):
    MOTION_TO_GOAL = "motion_to_goal"
    BOUNDARY_FOLLOW = "boundary_follow"


class Bug2Params(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    k_heading: float = 2.0
    d_trigger: float = 0.8
    d_follow: float = 0.6
    d_line: float = 0.2
    forward_cone_deg: float = 60.0
    k_follow: float = 1.5
    follow_speed: float = 0.5


@dataclass(frozen=True)
class Bug2State:
    mode: Bug2Mode
    m_line: Tuple[Tuple[float, float], Tuple[float, float]]
    hit_point: Optional[Tuple[float, float]] = None
    current_goal: int = 0
    follow_side: int = 1
    # set once boundary following has taken the robot off the m-line
    left_line: bool = False

    @classmethod
    def start(cls, position: Sequence[float], goal: Sequence[float], goal_index: int = 0) -> "Bug2State":
        return cls(mode=Bug2Mode.MOTION_TO_GOAL,
                   m_line=((float(position[0]), float(position[1])), (float(goal[0]), float(goal[1]))),
                   current_goal=goal_index)


def select_target(sigmas: Sequence[float], positions: Sequence = ()) -> int:
    """Highest current uncertainty; lowest index wins ties."""
    return highest_uncertainty(sigmas)


def heading_error(veh: VehicleState, goal: Sequence[float]) -> float:
    bearing = np.arctan2(goal[1] - veh.y, goal[0] - veh.x)
    return wrap_angle(bearing - veh.heading)


def distance_to_line(point: np.ndarray, start: np.ndarray, end: np.ndarray) -> float:
    """Distance from point to the segment start-end."""
    seg = end - start
    length2 = float(seg @ seg)
    if length2 == 0.0:
        return float(np.linalg.norm(point - start))
    s = np.clip(float((point - start) @ seg) / length2, 0.0, 1.0)
    return float(np.linalg.norm(point - (start + s * seg)))


def forward_cone_min(scan: np.ndarray, sensor: SensorSpec, cone: float) -> float:
    centers = sensor.sector_centers()
    inside = np.abs(centers) <= 0.5 * cone
    if not np.any(inside):
        inside = np.abs(centers) == np.min(np.abs(centers))
    return float(np.min(scan[inside]))


def _side_clearance(scan: np.ndarray, sensor: SensorSpec, side: int) -> float:
    centers = sensor.sector_centers()
    mask = (np.sign(centers) == side)
    return float(np.mean(scan[mask])) if np.any(mask) else sensor.max_range


def _motion_to_goal(veh: VehicleState, goal: Sequence[float], params: Bug2Params,
                    dom: DomainParams) -> np.ndarray:
    err = heading_error(veh, goal)
    w_cmd = np.clip(params.k_heading * err, -dom.w_max, dom.w_max)
    v_cmd = dom.v_max * max(0.0, np.cos(err))
    return np.array([v_cmd, w_cmd])


def _boundary_follow(state: Bug2State, scan: np.ndarray, params: Bug2Params, dom: DomainParams) -> np.ndarray:
    sensor = dom.sensor
    centers = sensor.sector_centers()
    side = state.follow_side
    on_side = (np.sign(centers) == side) | (np.abs(centers) <= 0.5 * np.deg2rad(params.forward_cone_deg))
    visible = on_side & (scan < 0.99 * sensor.max_range)
    speed = params.follow_speed * dom.v_max
    if not np.any(visible):
        # surface out of view (narrow sonar): arc toward the followed side
        return np.array([speed, side * 0.5 * dom.w_max])

    ranges = np.where(visible, scan, np.inf)
    k = int(np.argmin(ranges))
    nearest, bearing = float(ranges[k]), float(centers[k])
    # tangent to the surface, bent toward it when too far and away when too close
    desired = bearing - side * 0.5 * np.pi + side * params.k_follow * (nearest - params.d_follow)
    err = wrap_angle(desired)
    w_cmd = np.clip(params.k_heading * err, -dom.w_max, dom.w_max)
    front = forward_cone_min(scan, sensor, np.deg2rad(params.forward_cone_deg))
    v_cmd = speed * max(0.0, np.cos(err))
    if front < params.d_follow:
        v_cmd = 0.0
        w_cmd = -side * dom.w_max
    return np.array([v_cmd, w_cmd])


def bug2_command(state: Bug2State, veh: VehicleState, scan: np.ndarray, goal: Sequence[float],
                 dom: DomainParams, params: Bug2Params = Bug2Params()) -> Tuple[np.ndarray, Bug2State]:
    """
    One control decision.

    A clear forward cone keeps motion-to-goal in that mode. It does not end
    boundary following: that mode is left only by the m-line rule, so the
    robot keeps skirting a surface that has dropped out of the cone.

    Returns:
        (action [v_cmd, w_cmd] inside the domain's bounds, next state)
    """
    sensor = dom.sensor
    scan = np.asarray(scan, dtype=float)
    position = veh.position
    goal = np.asarray(goal, dtype=float)
    start = np.asarray(state.m_line[0])
    state = replace(state, m_line=(state.m_line[0], (float(goal[0]), float(goal[1]))))
    cone = np.deg2rad(params.forward_cone_deg)

    if state.mode == Bug2Mode.MOTION_TO_GOAL:
        if forward_cone_min(scan, sensor, cone) < params.d_trigger:
            left = _side_clearance(scan, sensor, 1)
            right = _side_clearance(scan, sensor, -1)
            # turn toward the clearer side; the obstacle stays on the other one
            side = -1 if left >= right else 1
            state = replace(state, mode=Bug2Mode.BOUNDARY_FOLLOW,
                            hit_point=(float(position[0]), float(position[1])), follow_side=side,
                            left_line=False)
        else:
            return _motion_to_goal(veh, goal, params, dom), state

    hit = np.asarray(state.hit_point)
    on_line = distance_to_line(position, start, goal) < params.d_line
    if not on_line and not state.left_line:
        state = replace(state, left_line=True)
    closer = np.linalg.norm(goal - position) < np.linalg.norm(goal - hit)
    if state.left_line and on_line and closer:
        state = replace(state, mode=Bug2Mode.MOTION_TO_GOAL, hit_point=None)
        return _motion_to_goal(veh, goal, params, dom), state
    return _boundary_follow(state, scan, params, dom), state


class Bug2Policy:
    """
    Bug2 pursuit of the most uncertain target; the goal is re-selected on
    every uncertainty reset.
    """

    name = "bug2"
    obs_width = None

    def __init__(self, params: Bug2Params = Bug2Params()):
        self.params = params
        self.state: Optional[Bug2State] = None
        self._last_sigmas: Optional[np.ndarray] = None

    def reset(self) -> None:
        self.state = None
        self._last_sigmas = None

    def act(self, obs: np.ndarray, view: ObservationView) -> np.ndarray:
        sigmas = view.sigmas
        reset_seen = self._last_sigmas is not None and np.any((sigmas == 0.0) & (self._last_sigmas > 0.0))
        if self.state is None or reset_seen:
            index = select_target(sigmas, view.est_positions)
            self.state = Bug2State.start(view.vehicle.position, view.est_positions[index], index)
        self._last_sigmas = sigmas.copy()
        goal = view.est_positions[self.state.current_goal]
        action, self.state = bug2_command(self.state, view.vehicle, view.scan, goal, view.domain, self.params)
        return action
