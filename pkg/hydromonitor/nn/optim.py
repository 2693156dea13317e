from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from hydromonitor.errors import NonFiniteError, ShapeMismatchError


@dataclass(frozen=True)
class AdamState:
    m: Tuple[np.ndarray, ...]
    v: Tuple[np.ndarray, ...]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray], lr: float = 1e-3, **kwargs) -> "AdamState":
        return cls(
            m=tuple(np.zeros_like(p, dtype=float) for p in params),
            v=tuple(np.zeros_like(p, dtype=float) for p in params),
            lr=lr,
            **kwargs,
        )


def adam_update(params: Sequence[np.ndarray], grads: Sequence[np.ndarray],
                state: AdamState) -> Tuple[List[np.ndarray], AdamState]:
    """
    One bias-corrected Adam step. Inputs are left untouched.

    Raises:
        ShapeMismatchError: params, grads and moments disagree
        NonFiniteError: a gradient holds NaN or inf
    """
    if not (len(params) == len(grads) == len(state.m)):
        raise ShapeMismatchError(f"{len(params)} params, {len(grads)} grads, {len(state.m)} moments")
    for p, g in zip(params, grads):
        if p.shape != np.shape(g):
            raise ShapeMismatchError(f"gradient shape {np.shape(g)} does not match parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient passed to adam_update")

    t = state.t + 1
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        step = state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        new_params.append((p - step).astype(p.dtype, copy=False))
        new_m.append(m)
        new_v.append(v)
    return new_params, replace(state, m=tuple(new_m), v=tuple(new_v), t=t)
