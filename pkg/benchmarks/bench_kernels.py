"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Reports the best-of-N wall time per call for each kernel and the speedup.
"""

import argparse
import timeit

import numpy as np

from neuropop import _fallback
from neuropop.games import ATFT, TFT, noisy_ipd_game, outcome_payoffs
from neuropop.network import init_params

try:
    from neuropop import _core
except ImportError:
    _core = None


def cases(batch):
    rng = np.random.default_rng(0)
    p = init_params(10, 4, rng, quasi_pure=True)
    z = rng.random((batch, 10))
    up = rng.normal(size=(batch, 4))
    hidden, soft, out = np.empty((batch, 10)), np.empty((batch, 4)), np.empty((batch, 4))
    argmax = np.empty(batch, dtype=np.int_)
    grads = [np.empty_like(a) for a in p.arrays()]
    game = noisy_ipd_game()
    x0 = np.full(4, 0.25)
    draws = rng.random((200_000, 2))
    f = outcome_payoffs()

    def fwd(mod):
        return lambda: mod.forward(p.W1, p.b1, p.W2, p.b2, z, True, 0.1, hidden, soft, out, argmax)

    def bwd(mod):
        fwd(mod)()
        return lambda: mod.backward(p.W2, z, hidden, soft, up, True, 0.1, *grads)

    return {
        f"forward (batch {batch})": fwd,
        f"backward (batch {batch})": bwd,
        "replicator (10^4 steps)": lambda mod: lambda: mod.replicator_run(game.payoff, x0, 0.01, 10_000, False),
        "IPD Monte Carlo (2*10^5 rounds)": lambda mod: lambda: mod.ipd_monte_carlo(
            TFT.responses, ATFT.responses, draws, 0.01, f, 0, 0),
    }


def best_time(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=2048)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':34s} {'compiled':>12s} {'python':>12s} {'speedup':>8s}")
    for name, make in cases(args.batch).items():
        py = best_time(make(_fallback), args.repeat)
        if _core is None:
            print(f"{name:34s} {'-':>12s} {py * 1e3:10.3f}ms {'-':>8s}")
            continue
        c = best_time(make(_core), args.repeat)
        print(f"{name:34s} {c * 1e3:10.3f}ms {py * 1e3:10.3f}ms {py / c:7.1f}x")


if __name__ == "__main__":
    main()
