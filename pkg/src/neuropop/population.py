"""Neural population model: a strategy network trained by self-play.

Each latent sample z ~ U[0,1]^n is one individual; the network maps it to a
(mixed or quasi-pure) strategy. Training pits a batch of individuals against
a second, independently drawn batch whose strategies are held constant, and
ascends the mean payoff. Initialization descends the Jensen-Shannon
divergence between a target frequency vector and the batch-mean output.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from neuropop.games import MatrixGame, as_strategy
from neuropop.network import (
    EPSILON,
    HIDDEN_UNITS,
    Gradients,
    NetworkParams,
    backward,
    forward,
    init_params,
    stop_gradient,
)
from neuropop.optim import LEARNING_RATE, AdamState, adam_step

log = logging.getLogger(__name__)

LATENT_DIM = 10
BATCH_SIZE = 2048
MEASURE_SAMPLES = 10_000
INIT_TOL = 1e-4
INIT_MAX_ITERS = 20_000
PROB_FLOOR = 1e-12
MEASURE_BLOCK = 2048  # measurement is reduced over fixed blocks so thread count cannot change it

# independent random streams, keyed together with (seed, counter)
Z_PLAYER, Z_OPPONENT, Z_INIT, Z_MEASURE, Z_PROBE = range(5)


class TrainingDiverged(FloatingPointError):
    pass


def latent_batch(seed: int, stream: int, counter: int, rows: int, dim: int) -> np.ndarray:
    """Uniform [0,1) latent rows from a fresh generator for (seed, stream, counter)."""
    return np.random.default_rng([seed, stream, counter]).random((rows, dim))


class PopulationModel:
    """Network parameters plus everything needed to replay a run."""

    def __init__(
        self,
        game: MatrixGame,
        params: NetworkParams,
        seed: int = 0,
        batch_size: int = BATCH_SIZE,
        adam: AdamState | None = None,
        step: int = 0,
        init_step: int = 0,
    ):
        if params.n_strategies != game.size:
            raise ValueError(f"network has {params.n_strategies} outputs but the game has {game.size} strategies")
        if batch_size < 1:
            raise ValueError("batch_size must be positive")
        self.game = game
        self.params = params
        self.seed = int(seed)
        self.batch_size = int(batch_size)
        self.adam = adam if adam is not None else AdamState.for_params(params.arrays())
        self.step = int(step)
        self.init_step = int(init_step)

    @classmethod
    def create(
        cls,
        game: MatrixGame,
        seed: int = 0,
        *,
        latent_dim: int = LATENT_DIM,
        hidden: int = HIDDEN_UNITS,
        quasi_pure: bool = False,
        epsilon: float = EPSILON,
        batch_size: int = BATCH_SIZE,
        lr: float = LEARNING_RATE,
        beta1: float = 0.9,
        beta2: float = 0.999,
    ) -> PopulationModel:
        rng = np.random.default_rng([seed, 99])
        params = init_params(latent_dim, game.size, rng, hidden, quasi_pure, epsilon)
        adam = AdamState.for_params(params.arrays(), lr=lr, beta1=beta1, beta2=beta2)
        return cls(game, params, seed, batch_size, adam)

    @property
    def latent_dim(self) -> int:
        return self.params.latent_dim

    @property
    def kind(self) -> str:
        return "neural-quasi-pure" if self.params.quasi_pure else "neural-mixed"

    def latent(self, stream: int, counter: int, rows: int | None = None) -> np.ndarray:
        return latent_batch(self.seed, stream, counter, rows or self.batch_size, self.latent_dim)

    def strategies(self, z) -> np.ndarray:
        return forward(self.params, z)[0]


def payoff_gradients(
    params: NetworkParams,
    game: MatrixGame,
    z1,
    z2,
    through_opponent: bool = False,
) -> tuple[float, Gradients]:
    """Mean payoff of the z1 batch against the z2 batch and its parameter gradient.

    With ``through_opponent`` the z2 branch is differentiated as well; self-play
    training never does this, it exists to show that the two differ.
    """
    p1, trace1 = forward(params, z1)
    p2, trace2 = forward(params, z2)
    p2 = stop_gradient(p2)
    b = len(p1)
    fitness = p2 @ game.payoff.T  # row i: M p2_i
    mean_payoff = float(np.einsum("ij,ij->", p1, fitness) / b)
    grads = backward(params, trace1, fitness / b)
    if through_opponent:
        extra = backward(params, trace2, (p1 @ game.payoff) / b)
        grads = Gradients(*(g + e for g, e in zip(grads, extra)))
    return mean_payoff, grads


def train_step(model: PopulationModel) -> float:
    """One self-play update; returns the mean payoff before the update."""
    z1 = model.latent(Z_PLAYER, model.step)
    z2 = model.latent(Z_OPPONENT, model.step)
    mean_payoff, grads = payoff_gradients(model.params, model.game, z1, z2)
    if not np.isfinite(mean_payoff) or not all(np.all(np.isfinite(g)) for g in grads):
        raise TrainingDiverged(
            f"non-finite payoff or gradient at step {model.step} (seed {model.seed}); "
            f"params: {model.params}"
        )
    adam_step(model.adam, model.params.arrays(), grads, "ascend")
    model.step += 1
    return mean_payoff


def kld(p, q) -> float:
    """Discrete Kullback-Leibler divergence, with 0 log 0 = 0 and q floored at 1e-12."""
    p = np.asarray(p, dtype=np.float64)
    q = np.clip(np.asarray(q, dtype=np.float64), PROB_FLOOR, 1.0)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def js_divergence(d, q, printed: bool = False) -> float:
    """Symmetric Jensen-Shannon divergence between two frequency vectors.

    ``printed=True`` instead evaluates 0.5 KL(d||m) + 0.5 KL(m||q), which is
    asymmetric and unbounded; kept only for comparison.
    """
    d = np.asarray(d, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if d.shape != q.shape:
        raise ValueError(f"dimension mismatch: {d.shape} vs {q.shape}")
    m = 0.5 * (d + q)
    if printed:
        return 0.5 * kld(d, m) + 0.5 * kld(m, q)
    # d + q is positive wherever d or q is, so no floor is needed; halving it
    # first could underflow for subnormal entries
    s = d + q
    total = 0.0
    for p in (d, q):
        mask = p > 0
        total += 0.5 * float(np.sum(p[mask] * np.log(2.0 * p[mask] / s[mask])))
    return max(total, 0.0)


def js_divergence_grad(d, q) -> np.ndarray:
    """Partial derivatives of the symmetric JSD in q: 0.5 log(q / m)."""
    d = np.asarray(d, dtype=np.float64)
    q = np.clip(np.asarray(q, dtype=np.float64), PROB_FLOOR, 1.0)
    return 0.5 * np.log(q / (0.5 * (d + q)))


@dataclass
class InitResult:
    converged: bool
    iterations: int
    jsd: float
    history: list[float] = field(default_factory=list, repr=False)


def initialize_to(
    model: PopulationModel,
    target,
    tol: float = INIT_TOL,
    max_iters: int = INIT_MAX_ITERS,
) -> InitResult:
    """Descend JSD(target, batch-mean output) until it drops below ``tol``.

    Uses its own Adam state with the model's hyperparameters, so the training
    optimizer starts fresh afterwards.
    """
    target = as_strategy(target, model.game.size)
    hp = model.adam
    adam = AdamState.for_params(model.params.arrays(), lr=hp.lr, beta1=hp.beta1, beta2=hp.beta2, eps_hat=hp.eps_hat)
    jsd = np.inf
    history = []
    for it in range(max_iters + 1):
        z = model.latent(Z_INIT, model.init_step)
        model.init_step += 1
        out, trace = forward(model.params, z)
        q = out.mean(axis=0)
        jsd = js_divergence(target, q)
        history.append(jsd)
        if jsd < tol:
            return InitResult(True, it, jsd, history)
        if it == max_iters:
            break
        upstream = np.broadcast_to(js_divergence_grad(target, q) / len(z), out.shape)
        adam_step(adam, model.params.arrays(), backward(model.params, trace, upstream), "descend")
    log.warning("initialization stopped after %d iterations with JSD %.3g", max_iters, jsd)
    return InitResult(False, max_iters, jsd, history)


def sample_population(
    model: PopulationModel,
    num_samples: int = MEASURE_SAMPLES,
    seed: int | None = None,
    workers: int = 1,
):
    """Frequencies and mean strategy over ``num_samples`` fresh individuals.

    Quasi-pure individuals are counted by the strategy they (nearly) play;
    mixed individuals contribute their whole strategy vector. Forward passes
    can be spread over ``workers`` threads; the result does not depend on it.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    counter = model.step if seed is None else seed
    z = model.latent(Z_MEASURE, counter, num_samples)
    n = model.game.size

    def block(start):
        out, trace = forward(model.params, z[start:start + MEASURE_BLOCK])
        return out.sum(axis=0), np.bincount(trace.argmax, minlength=n)

    starts = range(0, num_samples, MEASURE_BLOCK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(s) for s in starts]
    total = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    for out_sum, c in parts:  # fixed order keeps the float sum reproducible
        total += out_sum
        counts += c
    mean_out = total / num_samples
    if model.params.quasi_pure:
        freq = counts / num_samples
    else:
        freq = mean_out / mean_out.sum()
    return freq, mean_out


def measure_frequencies(
    model: PopulationModel, num_samples: int = MEASURE_SAMPLES, seed: int | None = None, workers: int = 1
) -> np.ndarray:
    return sample_population(model, num_samples, seed, workers)[0]


def gradient_probe(model: PopulationModel, batch_size: int | None = None) -> np.ndarray:
    """Batch-mean derivative of each individual's payoff with respect to its own outputs."""
    rows = batch_size or model.batch_size
    p2 = model.strategies(model.latent(Z_PROBE, model.step, rows))
    return (p2 @ model.game.payoff.T).mean(axis=0)


def save_checkpoint(model: PopulationModel, path) -> None:
    p, a = model.params, model.adam
    arrays = {f"param_{k}": v for k, v in zip(("W1", "b1", "W2", "b2"), p.arrays())}
    arrays.update({f"adam_m{k}": m for k, m in enumerate(a.m)})
    arrays.update({f"adam_v{k}": v for k, v in enumerate(a.v)})
    np.savez(
        Path(path),
        **arrays,
        quasi_pure=p.quasi_pure,
        epsilon=p.epsilon,
        adam_hyper=np.array([a.lr, a.beta1, a.beta2, a.eps_hat]),
        counters=np.array([a.t, model.step, model.init_step, model.seed, model.batch_size]),
        game_names=np.array(model.game.names),
        game_payoff=model.game.payoff,
        game_title=model.game.title,
    )


def load_checkpoint(path) -> PopulationModel:
    with np.load(Path(path)) as f:
        params = NetworkParams(
            *(f[f"param_{k}"] for k in ("W1", "b1", "W2", "b2")),
            quasi_pure=bool(f["quasi_pure"]),
            epsilon=float(f["epsilon"]),
        )
        lr, beta1, beta2, eps_hat = (float(v) for v in f["adam_hyper"])
        t, step, init_step, seed, batch = (int(v) for v in f["counters"])
        adam = AdamState(
            [f[f"adam_m{k}"] for k in range(4)],
            [f[f"adam_v{k}"] for k in range(4)],
            t, lr, beta1, beta2, eps_hat,
        )
        game = MatrixGame(tuple(str(n) for n in f["game_names"]), f["game_payoff"], str(f["game_title"]))
    return PopulationModel(game, params, seed, batch, adam, step, init_step)
