import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from hydromonitor.dsac.actor import Actor, ActionBounds, policy_sample
from hydromonitor.dsac.critic import QuantileCritic, critic_mean
from hydromonitor.dsac.losses import actor_loss, compute_targets, critic_loss
from hydromonitor.dsac.replay import ReplayBuffer
from hydromonitor.errors import CheckpointError, NonFiniteError
from hydromonitor.nn.checkpoint import Checkpoint
from hydromonitor.nn.network import NetworkParams, mlp, polyak
from hydromonitor.nn.optim import AdamState, adam_update

logger = logging.getLogger(__name__)


class AgentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden: Tuple[int, ...] = (256, 256)
    n_quantiles: int = 64
    lr: float = 1e-3
    gamma: float = 0.99
    polyak: float = 0.005
    kappa: float = 1.0
    batch_size: int = 256
    replay_capacity: int = 1_000_000
    warmup: int = 5000
    entropy_in_target: bool = True
    initial_alpha: float = 0.2
    target_entropy: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "AgentConfig":
        if self.n_quantiles < 1 or self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ValueError("n_quantiles, batch_size must be >= 1 and replay_capacity >= batch_size")
        if not 0 <= self.gamma < 1 or not 0 <= self.polyak <= 1:
            raise ValueError("gamma must lie in [0, 1) and polyak in [0, 1]")
        if self.kappa <= 0 or self.lr <= 0 or self.initial_alpha <= 0:
            raise ValueError("kappa, lr and initial_alpha must be > 0")
        if any(w < 1 for w in self.hidden):
            raise ValueError("hidden widths must be >= 1")
        return self


@dataclass(frozen=True)
class Temperature:
    log_alpha: float
    target_entropy: float

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)


@dataclass(frozen=True)
class Diagnostics:
    critic_loss: float
    actor_loss: float
    alpha: float
    mean_q: float


def temperature_objective(log_alpha: float, log_probs: np.ndarray, target_entropy: float) -> float:
    """J = E[-alpha (log pi + target_entropy)] with alpha = exp(log_alpha)."""
    return -math.exp(log_alpha) * float(np.mean(log_probs + target_entropy))


def temperature_grad(temp: Temperature, log_probs: np.ndarray) -> float:
    """dJ/d log_alpha; J is linear in alpha, so the gradient equals J itself."""
    return temperature_objective(temp.log_alpha, log_probs, temp.target_entropy)


def temperature_update(temp: Temperature, log_probs: np.ndarray,
                       state: AdamState) -> Tuple[Temperature, AdamState]:
    """One Adam step on log_alpha."""
    grad = temperature_grad(temp, log_probs)
    (new_log_alpha,), state = adam_update([np.array(temp.log_alpha)], [np.array(grad)], state)
    return replace(temp, log_alpha=float(new_log_alpha)), state


def soft_update(target_net: NetworkParams, online_net: NetworkParams, rho: float) -> NetworkParams:
    return polyak(target_net, online_net, rho)


def _step_network(net: NetworkParams, grads, state: AdamState) -> Tuple[NetworkParams, AdamState]:
    arrays, state = adam_update(net.arrays(), grads.arrays(), state)
    return net.with_arrays(arrays), state


class DSACAgent:
    """
    Actor, twin quantile critics, their targets, optimizer states and the
    temperature. Owned by exactly one learner; `actor` is an immutable
    snapshot that can be handed to other threads.
    """

    def __init__(self, actor: Actor, critics: Sequence[QuantileCritic], target_critics: Sequence[QuantileCritic],
                 temperature: Temperature, config: AgentConfig):
        self.config = config
        self.actor = actor
        self.critics = tuple(critics)
        self.target_critics = tuple(target_critics)
        self.temperature = temperature
        self.actor_opt = AdamState.zeros_like(actor.net.arrays(), lr=config.lr)
        self.critic_opts = tuple(AdamState.zeros_like(c.net.arrays(), lr=config.lr) for c in self.critics)
        self.temp_opt = AdamState.zeros_like([np.array(temperature.log_alpha)], lr=config.lr)
        self.updates = 0

    @classmethod
    def create(cls, obs_width: int, bounds: ActionBounds, config: AgentConfig,
               rng: np.random.Generator) -> "DSACAgent":
        dim = bounds.dim
        actor_net = mlp(obs_width, config.hidden, 2 * dim, rng, final_scale=0.1)
        critics = []
        for _ in range(2):
            net = mlp(obs_width + dim, config.hidden, config.n_quantiles, rng, final_scale=0.1)
            critics.append(QuantileCritic(net=net, bounds=bounds))
        target_entropy = -float(dim) if config.target_entropy is None else config.target_entropy
        temperature = Temperature(log_alpha=math.log(config.initial_alpha), target_entropy=target_entropy)
        return cls(Actor(net=actor_net, bounds=bounds), critics, critics, temperature, config)

    @property
    def obs_width(self) -> int:
        return self.actor.obs_width

    def act(self, obs: np.ndarray, rng: Optional[np.random.Generator] = None, deterministic: bool = False) -> np.ndarray:
        return policy_sample(self.actor, obs, rng, deterministic=deterministic).action[0]

    def q_value(self, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
        """min over the two online critics of the expected return."""
        return np.minimum(*(critic_mean(c, obs, action) for c in self.critics))

    def networks(self) -> Dict[str, NetworkParams]:
        return {
            "actor": self.actor.net,
            "critic_1": self.critics[0].net,
            "critic_2": self.critics[1].net,
            "critic_target_1": self.target_critics[0].net,
            "critic_target_2": self.target_critics[1].net,
        }

    def metadata(self) -> Dict[str, str]:
        return {
            "obs_width": str(self.obs_width),
            "action_width": str(self.actor.action_dim),
            "n_quantiles": str(self.config.n_quantiles),
            "hidden": ",".join(str(w) for w in self.config.hidden),
            "action_low": ",".join(repr(float(v)) for v in self.actor.bounds.low),
            "action_high": ",".join(repr(float(v)) for v in self.actor.bounds.high),
            "log_alpha": repr(self.temperature.log_alpha),
            "target_entropy": repr(self.temperature.target_entropy),
            "updates": str(self.updates),
        }

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint, config: Optional[AgentConfig] = None) -> "DSACAgent":
        meta = checkpoint.metadata
        nets = checkpoint.networks
        try:
            bounds = ActionBounds.of(
                [float(v) for v in meta["action_low"].split(",")],
                [float(v) for v in meta["action_high"].split(",")],
            )
            temperature = Temperature(log_alpha=float(meta["log_alpha"]),
                                      target_entropy=float(meta["target_entropy"]))
            hidden = tuple(int(w) for w in meta["hidden"].split(",") if w)
            if config is None:
                config = AgentConfig(hidden=hidden, n_quantiles=int(meta["n_quantiles"]))
            critics = [QuantileCritic(nets["critic_1"], bounds), QuantileCritic(nets["critic_2"], bounds)]
            targets = [QuantileCritic(nets["critic_target_1"], bounds), QuantileCritic(nets["critic_target_2"], bounds)]
            agent = cls(Actor(nets["actor"], bounds), critics, targets, temperature, config)
            agent.updates = int(meta.get("updates", "0"))
        except (KeyError, ValueError) as e:
            raise CheckpointError(f"checkpoint does not describe a DSAC agent: {e}")
        return agent


def _finite(value: float, component: str) -> float:
    if not np.isfinite(value):
        raise NonFiniteError(f"{component} became non-finite")
    return value


def train_step(agent: DSACAgent, buffer: ReplayBuffer, rng: np.random.Generator) -> Diagnostics:
    """
    One critic update (both critics), one actor update, one temperature
    update and one soft target update, in that order.

    Raises:
        NonFiniteError: naming the component whose loss diverged
    """
    cfg = agent.config
    batch = buffer.sample(cfg.batch_size, rng)
    alpha = agent.temperature.alpha

    targets = compute_targets(agent.target_critics, agent.actor, batch, cfg.gamma, alpha,
                              cfg.entropy_in_target, rng)
    critics, opts, losses, q_means = [], [], [], []
    for critic, opt in zip(agent.critics, agent.critic_opts):
        loss, grads, z = critic_loss(critic, targets, batch, cfg.kappa)
        _finite(loss, "critic loss")
        net, opt = _step_network(critic.net, grads, opt)
        critics.append(replace(critic, net=net))
        opts.append(opt)
        losses.append(loss)
        q_means.append(float(z.mean()))
    agent.critics = tuple(critics)
    agent.critic_opts = tuple(opts)

    a_loss, a_grads, log_probs = actor_loss(agent.actor, agent.critics, batch.obs, alpha, rng)
    _finite(a_loss, "actor loss")
    actor_net, agent.actor_opt = _step_network(agent.actor.net, a_grads, agent.actor_opt)
    agent.actor = replace(agent.actor, net=actor_net)

    agent.temperature, agent.temp_opt = temperature_update(agent.temperature, log_probs, agent.temp_opt)
    _finite(agent.temperature.log_alpha, "temperature")

    agent.target_critics = tuple(
        replace(target, net=soft_update(target.net, online.net, cfg.polyak))
        for target, online in zip(agent.target_critics, agent.critics)
    )
    agent.updates += 1
    return Diagnostics(
        critic_loss=float(np.mean(losses)),
        actor_loss=a_loss,
        alpha=agent.temperature.alpha,
        mean_q=_finite(float(np.mean(q_means)), "critic quantiles"),
    )
