"""Two-layer strategy network with hand-written forward and backward passes.

latent z -> dense -> sigmoid -> dense -> softmax [-> pure_epsilon]

The heavy per-row loops live in :mod:`neuropop.kernels`; this module owns the
parameter container, shape checks and the small reference operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from neuropop import kernels

HIDDEN_UNITS = 10
EPSILON = 0.1


@dataclass
class NetworkParams:
    W1: np.ndarray  # hidden x latent
    b1: np.ndarray
    W2: np.ndarray  # strategies x hidden
    b2: np.ndarray
    quasi_pure: bool = False
    epsilon: float = EPSILON

    def __post_init__(self):
        for name in ("W1", "b1", "W2", "b2"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            setattr(self, name, arr)
        nh, _ = self.W1.shape
        ns, nh2 = self.W2.shape
        if self.b1.shape != (nh,) or nh2 != nh or self.b2.shape != (ns,):
            raise ValueError("inconsistent layer shapes")
        if self.quasi_pure and not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        self.quasi_pure = bool(self.quasi_pure)
        self.epsilon = float(self.epsilon)

    @property
    def latent_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    @property
    def n_strategies(self) -> int:
        return self.W2.shape[0]

    def arrays(self) -> list[np.ndarray]:
        """The trainable tensors, in the order used by gradients and optimizers."""
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> NetworkParams:
        return NetworkParams(*(a.copy() for a in self.arrays()), self.quasi_pure, self.epsilon)


class Gradients(NamedTuple):
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray


@dataclass
class ForwardTrace:
    z: np.ndarray
    hidden: np.ndarray
    soft: np.ndarray
    out: np.ndarray
    argmax: np.ndarray


def init_params(
    latent_dim: int,
    n_strategies: int,
    rng: np.random.Generator,
    hidden: int = HIDDEN_UNITS,
    quasi_pure: bool = False,
    epsilon: float = EPSILON,
) -> NetworkParams:
    """Weights uniform in [-0.5, 0.5], zero biases."""
    return NetworkParams(
        W1=rng.uniform(-0.5, 0.5, (hidden, latent_dim)),
        b1=np.zeros(hidden),
        W2=rng.uniform(-0.5, 0.5, (n_strategies, hidden)),
        b2=np.zeros(n_strategies),
        quasi_pure=quasi_pure,
        epsilon=epsilon,
    )


def forward(params: NetworkParams, z) -> tuple[np.ndarray, ForwardTrace]:
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != params.latent_dim:
        raise ValueError(f"latent batch must have shape (b, {params.latent_dim}), got {z.shape}")
    b = len(z)
    trace = ForwardTrace(
        z=z,
        hidden=np.empty((b, params.hidden)),
        soft=np.empty((b, params.n_strategies)),
        out=np.empty((b, params.n_strategies)),
        argmax=np.empty(b, dtype=np.int64),
    )
    kernels.forward(
        params.W1, params.b1, params.W2, params.b2, z,
        params.quasi_pure, params.epsilon,
        trace.hidden, trace.soft, trace.out, trace.argmax,
    )
    return trace.out, trace


def backward(params: NetworkParams, trace: ForwardTrace, upstream) -> Gradients:
    """Gradient of sum_rows(upstream . output) with respect to every parameter."""
    upstream = np.ascontiguousarray(upstream, dtype=np.float64)
    if upstream.shape != trace.out.shape:
        raise ValueError(f"upstream shape {upstream.shape} does not match output {trace.out.shape}")
    if trace.hidden.shape[1] != params.hidden or trace.z.shape[1] != params.latent_dim:
        raise ValueError("trace was not produced by these parameters")
    grads = Gradients(*(np.empty_like(a) for a in params.arrays()))
    kernels.backward(
        params.W2, trace.z, trace.hidden, trace.soft, upstream,
        params.quasi_pure, params.epsilon, *grads,
    )
    return grads


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def softmax(logits):
    a = np.asarray(logits, dtype=np.float64)
    a = a - a.max(axis=-1, keepdims=True)
    e = np.exp(a)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(soft, upstream):
    """Vector-Jacobian product of softmax: s * (g - <g, s>)."""
    return soft * (upstream - np.sum(upstream * soft, axis=-1, keepdims=True))


def pure_epsilon(v, epsilon: float = EPSILON) -> np.ndarray:
    """Soft clamp towards the vertex of the largest entry.

    The winner maps into [1-eps, 1] and every other entry into [0, eps];
    the sum is preserved. Ties go to the lowest index. Works row-wise on 2-D input.
    """
    v = np.asarray(v, dtype=np.float64)
    out = epsilon * v
    idx = np.argmax(v, axis=-1)
    if v.ndim == 1:
        out[idx] += 1.0 - epsilon
    else:
        out[np.arange(len(v)), idx] += 1.0 - epsilon
    return out


def pure_epsilon_grad(upstream, v, epsilon: float = EPSILON) -> np.ndarray:
    # branch choice is locally constant, so the Jacobian is eps * I
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != np.shape(v):
        raise ValueError("upstream and input shapes differ")
    return epsilon * upstream


def stop_gradient(x) -> np.ndarray:
    """Read-only copy marking a value that no gradient may flow through."""
    out = np.array(x, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out
