"""
Dense feed-forward networks with explicit reverse-mode gradients.

Parameters are immutable values: updates build new NetworkParams, so a
snapshot handed to another thread never changes underneath it.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from hydromonitor.errors import ShapeMismatchError


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"
    TANH = "tanh"


class LayerSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    in_width: int
    out_width: int
    activation: Activation = Activation.RELU

    @model_validator(mode="after")
    def _check(self) -> "LayerSpec":
        if self.in_width <= 0 or self.out_width <= 0:
            raise ValueError("layer widths must be > 0")
        return self


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray
    biases: np.ndarray
    spec: LayerSpec


@dataclass(frozen=True)
class NetworkParams:
    layers: Tuple[Layer, ...]

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.spec.out_width != nxt.spec.in_width:
                raise ShapeMismatchError(
                    f"layer widths do not chain: {prev.spec.out_width} -> {nxt.spec.in_width}"
                )

    @property
    def in_width(self) -> int:
        return self.layers[0].spec.in_width

    @property
    def out_width(self) -> int:
        return self.layers[-1].spec.out_width

    @property
    def param_count(self) -> int:
        return sum(layer.weights.size + layer.biases.size for layer in self.layers)

    def widths(self) -> List[int]:
        return [self.in_width] + [layer.spec.out_width for layer in self.layers]

    def arrays(self) -> List[np.ndarray]:
        """Parameters in declaration order: W0, b0, W1, b1, ..."""
        out = []
        for layer in self.layers:
            out.extend([layer.weights, layer.biases])
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "NetworkParams":
        if len(arrays) != 2 * len(self.layers):
            raise ShapeMismatchError(f"expected {2 * len(self.layers)} arrays, got {len(arrays)}")
        layers = []
        for i, layer in enumerate(self.layers):
            w, b = arrays[2 * i], arrays[2 * i + 1]
            if w.shape != layer.weights.shape or b.shape != layer.biases.shape:
                raise ShapeMismatchError(f"layer {i}: shape {w.shape}/{b.shape} does not match")
            layers.append(Layer(weights=w, biases=b, spec=layer.spec))
        return NetworkParams(layers=tuple(layers))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


@dataclass
class ForwardCache:
    """Layer inputs and pre-activations of one forward pass (always 2D)."""

    inputs: List[np.ndarray]
    pre: List[np.ndarray]
    outputs: List[np.ndarray]
    squeeze: bool


@dataclass
class Gradients:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    input_grad: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out


def init_network(specs: Sequence[LayerSpec], rng: np.random.Generator, final_scale: float = 1.0,
                 dtype=np.float64) -> NetworkParams:
    """
    Uniform fan-in initialization: bound sqrt(6/fan_in) ahead of ReLU,
    sqrt(3/fan_in) otherwise. Biases start at zero.
    """
    layers = []
    for i, spec in enumerate(specs):
        gain = 6.0 if spec.activation == Activation.RELU else 3.0
        bound = np.sqrt(gain / spec.in_width)
        if i == len(specs) - 1:
            bound *= final_scale
        w = rng.uniform(-bound, bound, size=(spec.out_width, spec.in_width)).astype(dtype)
        b = np.zeros(spec.out_width, dtype=dtype)
        layers.append(Layer(weights=w, biases=b, spec=spec))
    return NetworkParams(layers=tuple(layers))


def mlp(in_width: int, hidden: Sequence[int], out_width: int, rng: np.random.Generator,
        hidden_activation: Activation = Activation.RELU,
        out_activation: Activation = Activation.IDENTITY,
        final_scale: float = 1.0) -> NetworkParams:
    widths = [in_width, *hidden, out_width]
    specs = []
    for i in range(len(widths) - 1):
        act = out_activation if i == len(widths) - 2 else hidden_activation
        specs.append(LayerSpec(in_width=widths[i], out_width=widths[i + 1], activation=act))
    return init_network(specs, rng, final_scale=final_scale)


def _activate(pre: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == Activation.RELU:
        return np.maximum(pre, 0.0)
    if activation == Activation.TANH:
        return np.tanh(pre)
    return pre


def forward(net: NetworkParams, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Affine + activation per layer for a vector or a (batch, width) matrix.

    Raises:
        ShapeMismatchError: input width differs from the first layer
    """
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    if h.ndim != 2 or h.shape[1] != net.in_width:
        raise ShapeMismatchError(f"input width {x.shape} does not match network width {net.in_width}")
    inputs, pres = [], []
    for layer in net.layers:
        inputs.append(h)
        pre = h @ layer.weights.T + layer.biases
        pres.append(pre)
        h = _activate(pre, layer.spec.activation)
    cache = ForwardCache(inputs=inputs, pre=pres, outputs=[h], squeeze=squeeze)
    return (h[0] if squeeze else h), cache


def backward(net: NetworkParams, cache: ForwardCache, output_grad: np.ndarray) -> Gradients:
    """
    Gradients of sum(output * output_grad) with respect to every parameter and
    to the network input.
    """
    grad = np.asarray(output_grad, dtype=float)
    if cache.squeeze:
        grad = grad[None, :] if grad.ndim == 1 else grad
    out = cache.outputs[0]
    if grad.shape != out.shape:
        raise ShapeMismatchError(f"output_grad shape {grad.shape} does not match output {out.shape}")
    if len(cache.inputs) != len(net.layers):
        raise ShapeMismatchError("cache does not come from this network")

    dws: List[Optional[np.ndarray]] = [None] * len(net.layers)
    dbs: List[Optional[np.ndarray]] = [None] * len(net.layers)
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        pre = cache.pre[i]
        act = layer.spec.activation
        if act == Activation.RELU:
            grad = grad * (pre > 0)
        elif act == Activation.TANH:
            grad = grad * (1.0 - np.tanh(pre) ** 2)
        dws[i] = grad.T @ cache.inputs[i]
        dbs[i] = grad.sum(axis=0)
        grad = grad @ layer.weights
    input_grad = grad[0] if cache.squeeze else grad
    return Gradients(weights=dws, biases=dbs, input_grad=input_grad)


def polyak(target: NetworkParams, online: NetworkParams, rho: float) -> NetworkParams:
    """target <- (1 - rho) * target + rho * online, per parameter."""
    mixed = [(1.0 - rho) * t + rho * o for t, o in zip(target.arrays(), online.arrays())]
    return target.with_arrays(mixed)
