from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from hydromonitor.errors import MonitoringError
from hydromonitor.evaluation.trials import TrialRecord


@dataclass(frozen=True)
class EvalSummary:
    policy: str
    env_id: str
    domain: str
    trials: int
    dt: float
    sigma_mean: Tuple[float, ...]
    first_visit_mean: Tuple[float, ...]
    first_visit_std: Tuple[float, ...]
    pooled_first_visit_mean: float
    pooled_first_visit_std: float
    collision_rate: float

    @property
    def mean_sigma(self) -> float:
        return float(np.mean(self.sigma_mean))

    @property
    def pooled_first_visit_seconds(self) -> Tuple[float, float]:
        return self.pooled_first_visit_mean * self.dt, self.pooled_first_visit_std * self.dt

    @property
    def first_visit_seconds(self) -> Tuple[float, ...]:
        return tuple(t * self.dt for t in self.first_visit_mean)


def first_visit_matrix(records: Sequence[TrialRecord]) -> np.ndarray:
    """(trials, targets) first-visit steps; trials without a visit count the horizon."""
    rows = []
    for record in records:
        rows.append([record.horizon if step is None else step for step in record.first_visits()])
    return np.array(rows, dtype=float)


def visit_intervals(record: TrialRecord) -> List[Tuple[int, int, int]]:
    """(target, start_step, end_step) for consecutive visits of the same target."""
    last = {}
    out = []
    for step, target in record.visits:
        if target in last:
            out.append((target, last[target], step))
        last[target] = step
    return out


def aggregate(records: Sequence[TrialRecord]) -> EvalSummary:
    """
    Summary statistics over trials of one (policy, env, domain) combination.

    sigma_mean[i] is the mean over trials of the time-mean of sigma_i; standard
    deviations use the population convention.
    """
    if not records:
        raise MonitoringError("cannot aggregate an empty list of trials")
    first = records[0]
    sigma_mean = np.mean([r.sigmas.mean(axis=0) for r in records], axis=0)
    visits = first_visit_matrix(records)
    return EvalSummary(
        policy=first.policy,
        env_id=first.env_id,
        domain=first.domain,
        trials=len(records),
        dt=first.dt,
        sigma_mean=tuple(float(v) for v in sigma_mean),
        first_visit_mean=tuple(float(v) for v in visits.mean(axis=0)),
        first_visit_std=tuple(float(v) for v in visits.std(axis=0)),
        pooled_first_visit_mean=float(visits.mean()),
        pooled_first_visit_std=float(visits.std()),
        collision_rate=float(np.mean([r.collision_step is not None for r in records])),
    )
