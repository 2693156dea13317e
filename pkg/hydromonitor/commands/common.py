import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from hydromonitor.commands.run_config import RunConfig, load_config
from hydromonitor.errors import ConfigError
from hydromonitor.evaluation.export import export
from hydromonitor.evaluation.metrics import EvalSummary, aggregate
from hydromonitor.evaluation.policies import Policy
from hydromonitor.evaluation.trials import EvalConfig, run_trials
from hydromonitor.sim.arena import EnvId
from hydromonitor.sim.dynamics import Domain
from hydromonitor.sim.env import EnvConfig
from hydromonitor.utils.config import OUT_DIR

logger = logging.getLogger(__name__)


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="run-config file (section.key=value lines)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value; repeatable")
    parser.add_argument("--env", choices=[e.value for e in EnvId], help="arena layout")
    parser.add_argument("--seed", type=int, help="run seed")
    parser.add_argument("--out", help=f"output directory (default under {OUT_DIR}/)")
    parser.add_argument("--log-level", help="overrides HYDROMONITOR_LOG_LEVEL")


def add_eval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, help="number of evaluation trials")
    parser.add_argument("--traces", type=int, help="write trajectory traces for the first N trials")


def flag_overrides(args: argparse.Namespace, seed_key: str) -> List[str]:
    """Translate named flags into `section.key=value` overrides."""
    pairs = [
        ("sim.env_id", getattr(args, "env", None)),
        (seed_key, getattr(args, "seed", None)),
        ("eval.trials", getattr(args, "trials", None)),
        ("eval.traces", getattr(args, "traces", None)),
        ("train.episodes_total", getattr(args, "episodes", None)),
        ("train.workers", getattr(args, "workers", None)),
        ("policy.kind", getattr(args, "policy", None)),
        ("policy.checkpoint", getattr(args, "checkpoint", None)),
    ]
    return [f"{key}={value}" for key, value in pairs if value is not None]


def resolve_config(args: argparse.Namespace, seed_key: str, extra: Sequence[str] = ()) -> RunConfig:
    """File values, then --set items, then named flags; later wins."""
    return load_config(args.config, [*args.overrides, *flag_overrides(args, seed_key), *extra])


def checkpoint_path(config: RunConfig) -> str:
    """The DSAC checkpoint from --checkpoint or policy.checkpoint."""
    if config.policy.checkpoint is None:
        raise ConfigError("no checkpoint given: pass --checkpoint or set policy.checkpoint")
    return config.policy.checkpoint


def out_dir(args: argparse.Namespace, default_name: str) -> Path:
    return Path(args.out) if args.out else Path(OUT_DIR) / default_name


def eval_domain(args: argparse.Namespace, fallback: Domain) -> Domain:
    value: Optional[str] = getattr(args, "domain", None)
    return Domain(value) if value else fallback


def run_evaluation(policy: Policy, env_config: EnvConfig, cfg: EvalConfig, out: Path) -> EvalSummary:
    """Trials, aggregation and CSV export for one (policy, env, domain) combination."""
    records = run_trials(policy, env_config, cfg, trace_dir=out / "traces" if cfg.traces else None)
    summary = aggregate(records)
    export(records, summary, out)
    logger.info("%s %s/%s: mean sigma %.4f, first visit %.1f +- %.1f steps, collision rate %.2f",
                summary.policy, summary.env_id, summary.domain, summary.mean_sigma,
                summary.pooled_first_visit_mean, summary.pooled_first_visit_std, summary.collision_rate)
    return summary
