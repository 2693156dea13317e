"""
Actor-learner training: K environment workers feed one shared replay buffer
through a bounded queue; the learner in the calling thread inserts every
transition, runs one gradient step per transition after warmup and
periodically publishes an immutable actor snapshot.

With lockstep enabled (the default for K = 1) each worker waits for the
learner to finish with its transition before acting again, which makes the
whole run reproducible from its seed.
"""

import logging
import os
import queue
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from tqdm import tqdm

from hydromonitor.dsac.actor import ActionBounds, Actor, sample_action
from hydromonitor.dsac.agent import AgentConfig, Diagnostics, DSACAgent, train_step
from hydromonitor.dsac.replay import ReplayBuffer, Transition
from hydromonitor.errors import TrainingAborted
from hydromonitor.nn.checkpoint import save_checkpoint
from hydromonitor.sim.env import EnvConfig, EnvMode, MonitoringEnv
from hydromonitor.utils.io import atomic_write_bytes, format_row
from hydromonitor.utils.log import progress_enabled

logger = logging.getLogger(__name__)

TRAIN_LOG_HEADER = [
    "update_index", "critic_loss", "actor_loss", "alpha", "mean_q", "episode_return", "episode_length",
]


class TrainRunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    workers: int = 5
    episodes_total: int = 2500
    horizon: int = 5000
    snapshot_interval: int = 100
    seed: int = 0
    queue_size: int = 64
    lockstep: Optional[bool] = None

    @model_validator(mode="after")
    def _check(self) -> "TrainRunConfig":
        if self.workers < 1 or self.episodes_total < 1:
            raise ValueError("workers and episodes_total must be >= 1")
        if self.horizon < 1 or self.snapshot_interval < 1 or self.queue_size < 1:
            raise ValueError("horizon, snapshot_interval and queue_size must be >= 1")
        return self

    @property
    def use_lockstep(self) -> bool:
        return self.workers == 1 if self.lockstep is None else self.lockstep


@dataclass
class TrainingResult:
    checkpoint_path: Path
    log_path: Path
    manifest_path: Path
    episodes: int
    env_steps: int
    steps_per_worker: List[int]
    buffer_insertions: int
    gradient_steps: int
    wall_clock: float


def derive_seeds(seed: int, workers: int) -> Dict[str, object]:
    """Worker and learner seeds, a pure function of (run seed, worker index)."""
    children = np.random.SeedSequence(seed).spawn(workers + 1)
    return {
        "workers": [int(c.generate_state(1)[0]) for c in children[:workers]],
        "learner": int(children[workers].generate_state(1)[0]),
    }


class SnapshotBox:
    """Holds the latest actor; readers always see a complete immutable value."""

    def __init__(self, actor: Actor):
        self._lock = threading.Lock()
        self._actor = actor
        self.version = 0

    def get(self) -> Actor:
        with self._lock:
            return self._actor

    def publish(self, actor: Actor) -> None:
        with self._lock:
            self._actor = actor
            self.version += 1


class EpisodeCounter:
    def __init__(self, total: int):
        self._lock = threading.Lock()
        self.total = total
        self.claimed = 0

    def claim(self) -> Optional[int]:
        with self._lock:
            if self.claimed >= self.total:
                return None
            self.claimed += 1
            return self.claimed


@dataclass
class _StepMessage:
    worker: int
    transition: Transition
    episode_return: Optional[float] = None
    episode_length: Optional[int] = None


@dataclass
class _WorkerDone:
    worker: int


@dataclass
class _WorkerFailed:
    worker: int
    error: BaseException


class _Worker(threading.Thread):
    def __init__(self, index: int, seed: int, env_config: EnvConfig, box: SnapshotBox, counter: EpisodeCounter,
                 outbox: "queue.Queue", stop: threading.Event, ack: Optional[threading.Semaphore]):
        super().__init__(name=f"worker-{index}", daemon=True)
        self.index = index
        self.seed = seed
        self.env_config = env_config
        self.box = box
        self.counter = counter
        self.outbox = outbox
        self.stop = stop
        self.ack = ack

    def _put(self, message) -> bool:
        while not self.stop.is_set():
            try:
                self.outbox.put(message, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def run(self) -> None:
        try:
            self._run_episodes()
            self._put(_WorkerDone(self.index))
        except BaseException as e:  # reported to the learner, which aborts the run
            logger.exception("worker %d failed", self.index)
            self._put(_WorkerFailed(self.index, e))

    def _run_episodes(self) -> None:
        env = MonitoringEnv(self.env_config)
        rng = np.random.default_rng(self.seed)
        while not self.stop.is_set():
            if self.counter.claim() is None:
                return
            obs = env.reset(int(rng.integers(2 ** 62)))
            episode_return, length = 0.0, 0
            while True:
                action, _ = sample_action(self.box.get(), obs, rng)
                result = env.step(action, EnvMode.TRAIN)
                episode_return += result.reward
                length += 1
                transition = Transition(
                    obs=obs, action=action, reward=result.reward, next_obs=result.obs,
                    done=result.terminated and not result.info.truncated,
                )
                message = _StepMessage(self.index, transition)
                if result.terminated:
                    message.episode_return, message.episode_length = episode_return, length
                if not self._put(message):
                    return
                if self.ack is not None:
                    self.ack.acquire()
                    if self.stop.is_set():
                        return
                obs = result.obs
                if result.terminated:
                    break


def _checkpoint_metadata(agent: DSACAgent, env_config: EnvConfig, cfg: TrainRunConfig) -> Dict[str, str]:
    meta = agent.metadata()
    meta.update({
        "domain": env_config.domain.domain.value,
        "env_id": env_config.arena.env_id.value,
        "sensor_sectors": str(env_config.domain.sensor.sectors),
        "n_targets": str(env_config.monitoring.n_targets),
        "seed": str(cfg.seed),
        "episodes": str(cfg.episodes_total),
    })
    return meta


def run_training(cfg: TrainRunConfig, env_config: EnvConfig, agent_config: AgentConfig,
                 out_dir: Union[str, Path], manifest_text: str = "") -> TrainingResult:
    """
    Train a DSAC agent with cfg.workers environment workers.

    Writes `checkpoint`, `train_log.csv` and `manifest.txt` into out_dir.

    Raises:
        TrainingAborted: a worker or the learner failed; the partial log is
            kept as train_log.partial.csv
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    env_config = env_config.model_copy(update={"horizon": cfg.horizon})
    seeds = derive_seeds(cfg.seed, cfg.workers)

    sizing_env = MonitoringEnv(env_config)
    bounds = ActionBounds.of(env_config.domain.action_low(), env_config.domain.action_high())
    learner_rng = np.random.default_rng(seeds["learner"])
    agent = DSACAgent.create(sizing_env.obs_width, bounds, agent_config, learner_rng)
    buffer = ReplayBuffer(agent_config.replay_capacity, sizing_env.obs_width, bounds.dim)
    box = SnapshotBox(agent.actor)
    counter = EpisodeCounter(cfg.episodes_total)
    outbox: "queue.Queue" = queue.Queue(maxsize=cfg.queue_size)
    stop = threading.Event()
    acks = [threading.Semaphore(0) for _ in range(cfg.workers)] if cfg.use_lockstep else [None] * cfg.workers
    workers = [
        _Worker(i, seeds["workers"][i], env_config, box, counter, outbox, stop, acks[i])
        for i in range(cfg.workers)
    ]
    logger.info("training %d episodes with %d workers in %s/%s (lockstep=%s)", cfg.episodes_total, cfg.workers,
                env_config.arena.env_id.value, env_config.domain.domain.value, cfg.use_lockstep)

    partial_path = out_dir / "train_log.partial.csv"
    log_path = out_dir / "train_log.csv"
    warmup = max(agent_config.warmup, agent_config.batch_size)
    steps_per_worker = [0] * cfg.workers
    gradient_steps, episodes, finished, collected = 0, 0, 0, 0
    last: Optional[Diagnostics] = None
    failure: Optional[str] = None

    with open(partial_path, "w") as log_file, \
            tqdm(total=cfg.episodes_total, desc="episodes", disable=not progress_enabled()) as bar:
        log_file.write(",".join(TRAIN_LOG_HEADER) + "\n")
        for w in workers:
            w.start()
        try:
            while finished < cfg.workers:
                message = outbox.get()
                if isinstance(message, _WorkerFailed):
                    failure = f"worker {message.worker} failed: {message.error!r}"
                    break
                if isinstance(message, _WorkerDone):
                    finished += 1
                    continue

                buffer.push(message.transition)
                steps_per_worker[message.worker] += 1
                collected += 1
                if collected > warmup:
                    last = train_step(agent, buffer, learner_rng)
                    gradient_steps += 1
                    if gradient_steps % cfg.snapshot_interval == 0:
                        box.publish(agent.actor)
                if message.episode_length is not None:
                    episodes += 1
                    diag = last or Diagnostics(float("nan"), float("nan"), agent.temperature.alpha, float("nan"))
                    row = format_row([gradient_steps, diag.critic_loss, diag.actor_loss, diag.alpha, diag.mean_q,
                                      float(message.episode_return), message.episode_length])
                    log_file.write(",".join(str(v) for v in row) + "\n")
                    log_file.flush()
                    bar.update(1)
                if acks[message.worker] is not None:
                    acks[message.worker].release()
        except Exception as e:
            failure = f"learner failed: {e!r}"
            logger.exception("learner failed")
        finally:
            if failure is not None:
                stop.set()
                for ack in acks:
                    if ack is not None:
                        ack.release()
                _drain(outbox, workers)
            for w in workers:
                w.join(timeout=5.0)

    if failure is not None:
        logger.error("training aborted after %d episodes; partial log kept at %s", episodes, partial_path)
        raise TrainingAborted(failure)

    os.replace(partial_path, log_path)
    checkpoint_path = out_dir / "checkpoint"
    save_checkpoint(checkpoint_path, agent.networks(), _checkpoint_metadata(agent, env_config, cfg))
    wall_clock = time.monotonic() - started

    manifest_path = out_dir / "manifest.txt"
    lines = [manifest_text.rstrip("\n")] if manifest_text else []
    lines += [
        f"# started_at={started_at}",
        f"# worker_seeds={','.join(str(s) for s in seeds['workers'])}",
        f"# learner_seed={seeds['learner']}",
        f"# env_steps={sum(steps_per_worker)}",
        f"# gradient_steps={gradient_steps}",
        f"# wall_clock_seconds={wall_clock:.3f}",
    ]
    atomic_write_bytes(manifest_path, ("\n".join(lines) + "\n").encode("utf-8"))

    logger.info("finished %d episodes, %d env steps, %d gradient steps in %.1fs",
                episodes, sum(steps_per_worker), gradient_steps, wall_clock)
    return TrainingResult(
        checkpoint_path=checkpoint_path,
        log_path=log_path,
        manifest_path=manifest_path,
        episodes=episodes,
        env_steps=sum(steps_per_worker),
        steps_per_worker=steps_per_worker,
        buffer_insertions=buffer.insertions,
        gradient_steps=gradient_steps,
        wall_clock=wall_clock,
    )


def _drain(outbox: "queue.Queue", workers: List[threading.Thread]) -> None:
    # unblock workers stuck on a full queue so they can observe the stop flag
    deadline = time.monotonic() + 5.0
    while any(w.is_alive() for w in workers) and time.monotonic() < deadline:
        try:
            outbox.get(timeout=0.05)
        except queue.Empty:
            pass
