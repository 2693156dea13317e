import argparse
import logging

from hydromonitor.commands.common import (
    add_common_flags,
    add_eval_flags,
    checkpoint_path,
    out_dir,
    resolve_config,
    run_evaluation,
)
from hydromonitor.errors import CheckpointError
from hydromonitor.evaluation.policies import DSACPolicy
from hydromonitor.nn.checkpoint import read_header
from hydromonitor.sim.dynamics import Domain
from hydromonitor.sim.env import MonitoringEnv
from hydromonitor.utils.io import file_sha256

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("transfer", help="evaluate an air-trained checkpoint in water, frozen")
    add_common_flags(parser)
    add_eval_flags(parser)
    parser.add_argument("--checkpoint", help="air-trained checkpoint (default policy.checkpoint)")
    parser.set_defaults(func=transfer)


def transfer(args: argparse.Namespace) -> int:
    """
    Zero-shot transfer: the checkpoint is only read, and its hash is
    verified unchanged after evaluation.
    """
    config = resolve_config(args, "eval.seed")
    env_config = config.env_config(domain=Domain.WATER)
    checkpoint = checkpoint_path(config)
    header = read_header(checkpoint)
    if header.get("domain", Domain.AIR.value) != Domain.AIR.value:
        logger.warning("checkpoint was trained in %s, not air", header.get("domain"))

    digest = file_sha256(checkpoint)
    policy = DSACPolicy.from_checkpoint(checkpoint, obs_width=MonitoringEnv(env_config).obs_width)
    out = out_dir(args, f"transfer-{env_config.arena.env_id.value}")
    run_evaluation(policy, env_config, config.eval, out)

    if file_sha256(checkpoint) != digest:
        raise CheckpointError(f"checkpoint {checkpoint} changed during transfer evaluation")
    logger.info("checkpoint sha256 %s unchanged", digest)
    return 0
