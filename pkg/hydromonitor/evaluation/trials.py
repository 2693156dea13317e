"""
Evaluation trials: one Eval-mode episode per seed, recording the uncertainty
of every target before each step, the steps at which targets were visited
and whether (and when) the vehicle collided.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from tqdm import tqdm

from hydromonitor.errors import ShapeMismatchError
from hydromonitor.evaluation.policies import Policy
from hydromonitor.sim.env import EnvConfig, EnvMode, MonitoringEnv
from hydromonitor.utils.log import progress_enabled

logger = logging.getLogger(__name__)


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    trials: int = 100
    seed: int = 10_000
    traces: int = 0

    @model_validator(mode="after")
    def _check(self) -> "EvalConfig":
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.traces < 0:
            raise ValueError("traces must be >= 0")
        return self


@dataclass
class TrialRecord:
    policy: str
    env_id: str
    domain: str
    seed: int
    horizon: int
    dt: float
    # sigmas[t, i] is the uncertainty of target i before step t
    sigmas: np.ndarray
    visits: List[Tuple[int, int]] = field(default_factory=list)
    collision_step: Optional[int] = None

    @property
    def elapsed(self) -> int:
        return self.sigmas.shape[0]

    @property
    def n_targets(self) -> int:
        return self.sigmas.shape[1]

    def first_visits(self) -> List[Optional[int]]:
        first: List[Optional[int]] = [None] * self.n_targets
        for step, target in self.visits:
            if first[target] is None:
                first[target] = step
        return first


def run_trial(policy: Policy, env_config: EnvConfig, seed: int, record_trace: bool = False,
              trace_path: Optional[Union[str, Path]] = None) -> TrialRecord:
    """
    Run the policy for one Eval-mode episode (collision or horizon).

    Raises:
        ShapeMismatchError: the policy was built for another observation width
    """
    env = MonitoringEnv(env_config, record_trace=record_trace or trace_path is not None)
    obs = env.reset(seed)
    if policy.obs_width is not None and policy.obs_width != env.obs_width:
        raise ShapeMismatchError(f"policy {policy.name} expects width {policy.obs_width}, "
                                 f"environment produces {env.obs_width}")
    policy.reset()

    series = []
    visits: List[Tuple[int, int]] = []
    collision_step = None
    step = 0
    while True:
        series.append(env.sigmas)
        result = env.step(policy.act(obs, env.view()), EnvMode.EVAL)
        step += 1
        if result.info.collided:
            collision_step = step
        if result.terminated:
            break
        visits.extend((step, i) for i in result.info.visited)
        obs = result.obs

    if trace_path is not None:
        env.export_trace(trace_path)
    return TrialRecord(
        policy=policy.name,
        env_id=env_config.arena.env_id.value,
        domain=env_config.domain.domain.value,
        seed=seed,
        horizon=env_config.horizon,
        dt=env_config.domain.dt,
        sigmas=np.array(series),
        visits=visits,
        collision_step=collision_step,
    )


def run_trials(policy: Policy, env_config: EnvConfig, cfg: EvalConfig,
               trace_dir: Optional[Union[str, Path]] = None) -> List[TrialRecord]:
    """Trial k runs with seed cfg.seed + k; the first cfg.traces trials keep a trajectory trace."""
    records = []
    label = f"{policy.name} {env_config.arena.env_id.value}/{env_config.domain.domain.value}"
    for k in tqdm(range(cfg.trials), desc=label, disable=not progress_enabled()):
        trace_path = None
        if trace_dir is not None and k < cfg.traces:
            trace_path = Path(trace_dir) / f"{policy.name}_trial{k}.csv"
        records.append(run_trial(policy, env_config, cfg.seed + k, trace_path=trace_path))
    collisions = sum(r.collision_step is not None for r in records)
    logger.info("%s: %d trials, %d collisions", label, len(records), collisions)
    return records
