import numpy as np
import pytest

from hydromonitor.dsac.actor import ActionBounds, Actor
from hydromonitor.dsac.critic import QuantileCritic
from hydromonitor.nn.network import Activation, NetworkParams, mlp
from hydromonitor.sim.arena import ArenaSpec, EnvId
from hydromonitor.sim.dynamics import DomainParams
from hydromonitor.sim.env import EnvConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def air_bounds():
    dom = DomainParams.air()
    return ActionBounds.of(dom.action_low(), dom.action_high())


@pytest.fixture
def small_actor(rng, air_bounds):
    # tanh hidden units keep finite differences away from ReLU kinks
    net = mlp(5, (8, 8), 2 * air_bounds.dim, rng, hidden_activation=Activation.TANH)
    return Actor(net=net, bounds=air_bounds)


@pytest.fixture
def small_critics(rng, air_bounds):
    return [
        QuantileCritic(mlp(5 + air_bounds.dim, (8, 8), 6, rng, hidden_activation=Activation.TANH), air_bounds)
        for _ in range(2)
    ]


@pytest.fixture
def env1_config():
    return EnvConfig(arena=ArenaSpec.preset(EnvId.ENV1), domain=DomainParams.air())


@pytest.fixture
def env2_config():
    return EnvConfig(arena=ArenaSpec.preset(EnvId.ENV2), domain=DomainParams.air())


def constant_critic(obs_width: int, bounds: ActionBounds, values, rng) -> QuantileCritic:
    """A critic whose quantiles equal `values` for every input."""
    values = np.asarray(values, dtype=float)
    net = mlp(obs_width + bounds.dim, (4,), values.size, rng)
    arrays = net.arrays()
    arrays[-2] = np.zeros_like(arrays[-2])
    arrays[-1] = values.copy()
    return QuantileCritic(net.with_arrays(arrays), bounds)


def numeric_grad(f, arrays, eps=1e-6):
    """Central differences of scalar f() with respect to every entry of every array (mutated in place)."""
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        it = np.nditer(a, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = a[idx]
            a[idx] = old + eps
            plus = f()
            a[idx] = old - eps
            minus = f()
            a[idx] = old
            g[idx] = (plus - minus) / (2.0 * eps)
        grads.append(g)
    return grads


def relative_error(analytic, numeric) -> float:
    a = np.concatenate([np.ravel(x) for x in analytic])
    n = np.concatenate([np.ravel(x) for x in numeric])
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12))


def copy_net(net: NetworkParams) -> NetworkParams:
    return net.with_arrays([a.copy() for a in net.arrays()])
