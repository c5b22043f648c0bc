"""Independent reference computations used by the tests.

Nothing here calls the backward kernels: gradients come from central finite
differences of forward evaluations only.
"""

import numpy as np

from neuropop.network import NetworkParams, forward, init_params


def central_diff(loss, arrays, step=1e-5):
    """Numerical gradient of ``loss()`` with respect to each array, perturbed in place."""
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            orig = a[idx]
            a[idx] = orig + step
            up = loss()
            a[idx] = orig - step
            down = loss()
            a[idx] = orig
            g[idx] = (up - down) / (2 * step)
        grads.append(g)
    return grads


def max_relative_error(analytic, numeric, floor=1e-6):
    """Largest elementwise |a - n| / max(|a|, |n|, floor) over all tensors."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def random_params(rng, latent=3, strategies=3, hidden=5, quasi_pure=False, epsilon=0.1, scale=1.0):
    p = init_params(latent, strategies, rng, hidden, quasi_pure, epsilon)
    p.W1 *= 2 * scale
    p.W2 *= 2 * scale
    p.b1[:] = rng.normal(0, scale, p.b1.shape)
    p.b2[:] = rng.normal(0, scale, p.b2.shape)
    return p


def argmax_margin(params: NetworkParams, z) -> float:
    """Smallest gap between the top two softmax entries over the batch."""
    _, trace = forward(params, z)
    top2 = np.sort(trace.soft, axis=1)[:, -2:]
    return float(np.min(top2[:, 1] - top2[:, 0]))


def replicator_reference(payoff, x0, alpha, steps):
    """Plain-Python replicator loop, one strategy at a time."""
    x = [float(v) for v in x0]
    n = len(x)
    out = [list(x)]
    for _ in range(steps):
        f = [sum(payoff[i][j] * x[j] for j in range(n)) for i in range(n)]
        phi = sum(x[i] * f[i] for i in range(n))
        x = [x[i] + alpha * x[i] * (f[i] - phi) for i in range(n)]
        s = sum(x)
        x = [v / s for v in x]
        out.append(list(x))
    return np.array(out)
