import argparse
import logging

from hydromonitor.commands.common import add_common_flags, out_dir, resolve_config
from hydromonitor.commands.run_config import dump_config
from hydromonitor.parallel.training import run_training
from hydromonitor.sim.dynamics import Domain

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train a DSAC policy with parallel workers")
    add_common_flags(parser)
    parser.add_argument("--domain", choices=[d.value for d in Domain], help="training medium (default air)")
    parser.add_argument("--episodes", type=int, help="total training episodes")
    parser.add_argument("--workers", type=int, help="number of environment workers")
    parser.set_defaults(func=train)


def train(args: argparse.Namespace) -> int:
    """
    Train in one medium and write checkpoint, train_log.csv and manifest.txt
    """
    extra = [f"train.domain={args.domain}"] if args.domain else []
    config = resolve_config(args, "train.seed", extra)
    env_config = config.env_config()
    out = out_dir(args, f"train-{config.sim.env_id.value}-{config.train.domain.value}-seed{config.train.seed}")

    result = run_training(config.train_run(), env_config, config.agent, out, dump_config(config))
    logger.info("checkpoint written to %s", result.checkpoint_path)
    return 0
