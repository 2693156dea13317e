# This file makes the sim directory a Python package
from hydromonitor.sim.arena import ArenaSpec, EnvId, Obstacle
from hydromonitor.sim.dynamics import Domain, DomainParams, OUParams, VehicleState, ou_step, step_vehicle, wrap_angle
from hydromonitor.sim.env import (
    EnvConfig,
    EnvMode,
    MonitoringEnv,
    ObservationView,
    StepInfo,
    StepResult,
    build_observation,
    highest_uncertainty,
    observation_width,
)
from hydromonitor.sim.reward import RewardWeights, compute_reward
from hydromonitor.sim.sensors import SensorKind, SensorSpec, beam_ranges, cast_rays
from hydromonitor.sim.targets import (
    MonitoringParams,
    TargetSpec,
    TargetState,
    curve_period,
    lissajous_position,
    step_targets,
    update_uncertainty,
)
