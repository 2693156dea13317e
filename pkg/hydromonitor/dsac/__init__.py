# This file makes the dsac directory a Python package
from hydromonitor.dsac.actor import ActionBounds, Actor, policy_sample, sample_action
from hydromonitor.dsac.agent import (
    AgentConfig,
    Diagnostics,
    DSACAgent,
    Temperature,
    soft_update,
    temperature_grad,
    temperature_objective,
    temperature_update,
    train_step,
)
from hydromonitor.dsac.critic import QuantileCritic, critic_mean, quantile_fractions
from hydromonitor.dsac.losses import actor_loss, compute_targets, critic_loss, quantile_huber
from hydromonitor.dsac.replay import Batch, ReplayBuffer, Transition
