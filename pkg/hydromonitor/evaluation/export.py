"""
CSV outputs of an evaluation run.

summary.csv     policy, env, domain, sigma_1..sigma_n, t_mean, t_std,
                collision_rate, t_mean_s, t_std_s, t_first_1..t_first_n,
                t_first_1_s..t_first_n_s, trials
timeseries.csv  trial, step, sigma_1..sigma_n (one row per elapsed step)
intervals.csv   trial, target, start_step, end_step, interval

Floats carry 9 significant digits; t_* columns are steps, *_s seconds.
"""

from pathlib import Path
from typing import Dict, Iterator, List, Sequence, Union

from hydromonitor.evaluation.metrics import EvalSummary, visit_intervals
from hydromonitor.evaluation.trials import TrialRecord
from hydromonitor.utils.io import write_csv


def summary_header(n_targets: int) -> List[str]:
    sigma = [f"sigma_{i}" for i in range(1, n_targets + 1)]
    first = [f"t_first_{i}" for i in range(1, n_targets + 1)]
    first_s = [f"{name}_s" for name in first]
    return ["policy", "env", "domain", *sigma, "t_mean", "t_std", "collision_rate",
            "t_mean_s", "t_std_s", *first, *first_s, "trials"]


def summary_row(summary: EvalSummary) -> list:
    t_mean_s, t_std_s = summary.pooled_first_visit_seconds
    return [summary.policy, summary.env_id, summary.domain, *summary.sigma_mean,
            summary.pooled_first_visit_mean, summary.pooled_first_visit_std, summary.collision_rate,
            t_mean_s, t_std_s, *summary.first_visit_mean, *summary.first_visit_seconds, summary.trials]


def _series_rows(records: Sequence[TrialRecord]) -> Iterator[list]:
    for k, record in enumerate(records):
        for step, row in enumerate(record.sigmas):
            yield [k, step, *(float(v) for v in row)]


def _interval_rows(records: Sequence[TrialRecord]) -> Iterator[list]:
    for k, record in enumerate(records):
        for target, start, end in visit_intervals(record):
            yield [k, target + 1, start, end, end - start]


def export_summaries(summaries: Sequence[EvalSummary], path: Union[str, Path]) -> int:
    n_targets = len(summaries[0].sigma_mean)
    return write_csv(path, summary_header(n_targets), (summary_row(s) for s in summaries))


def export(records: Sequence[TrialRecord], summary: EvalSummary, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write summary.csv, timeseries.csv and intervals.csv into out_dir.

    Raises:
        OSError: out_dir cannot be created or written
    """
    out_dir = Path(out_dir)
    n_targets = len(summary.sigma_mean)
    paths = {
        "summary": out_dir / "summary.csv",
        "timeseries": out_dir / "timeseries.csv",
        "intervals": out_dir / "intervals.csv",
    }
    export_summaries([summary], paths["summary"])
    write_csv(paths["timeseries"], ["trial", "step", *(f"sigma_{i}" for i in range(1, n_targets + 1))],
              _series_rows(records))
    write_csv(paths["intervals"], ["trial", "target", "start_step", "end_step", "interval"],
              _interval_rows(records))
    return paths
