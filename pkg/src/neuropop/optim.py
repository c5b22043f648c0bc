"""Adam and plain SGD, usable for ascent (self-play) and descent (initialization).

Both update the parameter arrays in place and return them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEARNING_RATE = 2e-4


class NonFiniteGradient(FloatingPointError):
    pass


def _sign(direction: str) -> float:
    if direction == "ascend":
        return 1.0
    if direction == "descend":
        return -1.0
    raise ValueError(f"direction must be 'ascend' or 'descend', got {direction!r}")


def _check_finite(grads):
    for k, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"gradient tensor {k} has non-finite entries: {g}")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    @classmethod
    def for_params(cls, params, lr=LEARNING_RATE, beta1=0.9, beta2=0.999, eps_hat=1e-8) -> AdamState:
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            lr=lr, beta1=beta1, beta2=beta2, eps_hat=eps_hat,
        )

    def copy(self) -> AdamState:
        return AdamState(
            [a.copy() for a in self.m], [a.copy() for a in self.v],
            self.t, self.lr, self.beta1, self.beta2, self.eps_hat,
        )


def adam_step(state: AdamState, params, grads, direction: str = "descend"):
    sign = _sign(direction)
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and optimizer state disagree on tensor count")
    _check_finite(grads)
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}, state {m.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p += sign * state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps_hat)
    return params


def sgd_step(params, grads, lr: float, direction: str = "descend"):
    sign = _sign(direction)
    _check_finite(grads)
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}")
        p += sign * lr * g
    return params
