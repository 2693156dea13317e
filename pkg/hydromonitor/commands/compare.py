import argparse

from hydromonitor.baseline.bug2 import Bug2Policy
from hydromonitor.commands.common import (
    add_common_flags,
    add_eval_flags,
    checkpoint_path,
    eval_domain,
    out_dir,
    resolve_config,
    run_evaluation,
)
from hydromonitor.evaluation.export import export_summaries
from hydromonitor.evaluation.policies import DSACPolicy
from hydromonitor.sim.dynamics import Domain
from hydromonitor.sim.env import MonitoringEnv


def register(subparsers) -> None:
    parser = subparsers.add_parser("compare", help="DSAC against Bug2 over matched seeds")
    add_common_flags(parser)
    add_eval_flags(parser)
    parser.add_argument("--domain", choices=[d.value for d in Domain], help="evaluation medium (default air)")
    parser.add_argument("--checkpoint", help="checkpoint of a trained DSAC policy (default policy.checkpoint)")
    parser.set_defaults(func=compare)


def compare(args: argparse.Namespace) -> int:
    """One summary row per policy; every policy sees the same trial seeds."""
    config = resolve_config(args, "eval.seed")
    env_config = config.env_config(domain=eval_domain(args, Domain.AIR))
    width = MonitoringEnv(env_config).obs_width
    dsac = DSACPolicy.from_checkpoint(checkpoint_path(config), obs_width=width)
    out = out_dir(args, f"compare-{env_config.arena.env_id.value}-{env_config.domain.domain.value}")

    summaries = []
    for policy in (dsac, Bug2Policy()):
        summaries.append(run_evaluation(policy, env_config, config.eval, out / policy.name))
    export_summaries(summaries, out / "summary.csv")
    return 0
