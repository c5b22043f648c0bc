"""Pure numpy versions of the compiled kernels in ``_core.pyx``.

Every function writes into the same caller-owned buffers and returns the
same values as its compiled twin, so :mod:`neuropop.kernels` can swap them.
"""

import numpy as np


def forward(W1, b1, W2, b2, z, quasi_pure, epsilon, hidden, soft, out, argmax):
    np.matmul(z, W1.T, out=hidden)
    hidden += b1
    np.clip(hidden, -500.0, 500.0, out=hidden)  # same clamp as the compiled kernel
    np.negative(hidden, out=hidden)
    np.exp(hidden, out=hidden)
    hidden += 1.0
    np.reciprocal(hidden, out=hidden)

    np.matmul(hidden, W2.T, out=soft)
    soft += b2
    soft -= soft.max(axis=1, keepdims=True)
    np.exp(soft, out=soft)
    soft /= soft.sum(axis=1, keepdims=True)

    # first maximal index wins, matching the compiled loop
    argmax[:] = soft.argmax(axis=1)
    if quasi_pure:
        np.multiply(soft, epsilon, out=out)
        out[np.arange(len(out)), argmax] += 1.0 - epsilon
    else:
        out[:] = soft


def backward(W2, z, hidden, soft, upstream, quasi_pure, epsilon, gW1, gb1, gW2, gb2):
    g = upstream * epsilon if quasi_pure else upstream
    ga = soft * (g - np.einsum("ij,ij->i", g, soft)[:, None])
    np.matmul(ga.T, hidden, out=gW2)
    gb2[:] = ga.sum(axis=0)
    gp = ga @ W2
    gp *= hidden * (1.0 - hidden)
    np.matmul(gp.T, z, out=gW1)
    gb1[:] = gp.sum(axis=0)


def replicator_run(payoff, x0, alpha, steps, literal):
    # plain floats: for a handful of strategies this beats per-step numpy calls
    m = np.asarray(payoff, dtype=np.float64).tolist()
    x = [float(v) for v in x0]
    n = len(x)
    rows = [list(x)]
    for t in range(1, steps + 1):
        f = [sum(m[i][j] * x[j] for j in range(n)) for i in range(n)]
        phi = sum(x[i] * f[i] for i in range(n))
        if literal:
            x = [x[i] + alpha * (f[i] - phi) for i in range(n)]
        else:
            x = [x[i] + alpha * x[i] * (f[i] - phi) for i in range(n)]
        if min(x) < 0.0 or max(x) > 1.0:
            return np.array(rows), t
        total = sum(x)
        x = [v / total for v in x]
        rows.append(x)
    return np.array(rows), -1


def ipd_monte_carlo(resp1, resp2, draws, noise, outcome_payoff, open1, open2):
    flips = draws < noise
    a, b = int(open1), int(open2)
    total = 0.0
    for t in range(len(draws)):
        if t:
            a, b = int(resp1[b]), int(resp2[a])
        if flips[t, 0]:
            a = 1 - a
        if flips[t, 1]:
            b = 1 - b
        total += outcome_payoff[2 * a + b]
    return total / len(draws)
