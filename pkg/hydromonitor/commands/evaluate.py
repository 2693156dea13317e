import argparse

from hydromonitor.commands.common import (
    add_common_flags,
    add_eval_flags,
    eval_domain,
    out_dir,
    resolve_config,
    run_evaluation,
)
from hydromonitor.commands.run_config import PolicyKind
from hydromonitor.evaluation.policies import make_policy
from hydromonitor.sim.dynamics import Domain
from hydromonitor.sim.env import MonitoringEnv


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="evaluate one policy in one environment and medium")
    add_common_flags(parser)
    add_eval_flags(parser)
    parser.add_argument("--domain", choices=[d.value for d in Domain], help="evaluation medium (default air)")
    parser.add_argument("--policy", choices=[k.value for k in PolicyKind], help="policy to evaluate")
    parser.add_argument("--checkpoint", help="checkpoint of a trained DSAC policy")
    parser.set_defaults(func=evaluate)


def evaluate(args: argparse.Namespace) -> int:
    config = resolve_config(args, "eval.seed")
    env_config = config.env_config(domain=eval_domain(args, Domain.AIR))
    width = MonitoringEnv(env_config).obs_width
    policy = make_policy(config.policy.kind.value, config.policy.checkpoint, obs_width=width)
    out = out_dir(args, f"eval-{policy.name}-{env_config.arena.env_id.value}-{env_config.domain.domain.value}")

    run_evaluation(policy, env_config, config.eval, out)
    return 0
