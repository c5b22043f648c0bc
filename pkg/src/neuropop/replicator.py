"""Discrete-time replicator dynamics: x_i <- x_i + alpha * x_i * (f_i - phi).

``literal=True`` drops the x_i factor (x_i <- x_i + alpha * (f_i - phi)),
which neither keeps the simplex nor fixes the vertices; it is provided only
for side-by-side comparison and is renormalised after every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from neuropop import kernels
from neuropop.games import MatrixGame, as_strategy
from neuropop.trajectory import TrajectoryRecord

ALPHA = 0.01


class StepRejected(ValueError):
    """A frequency left [0, 1]; retry with a smaller step size."""


@dataclass(frozen=True)
class ReplicatorState:
    x: np.ndarray
    t: int = 0
    alpha: float = ALPHA

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "x", as_strategy(self.x))


def _run(game: MatrixGame, x0, alpha: float, steps: int, literal: bool) -> np.ndarray:
    x0 = as_strategy(x0, game.size)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    traj, failed_at = kernels.replicator_run(game.payoff, x0, float(alpha), int(steps), bool(literal))
    if failed_at >= 0:
        raise StepRejected(
            f"step {failed_at} pushed a frequency outside [0, 1] at alpha={alpha}; "
            f"last valid state {traj[-1]}"
        )
    return traj


def replicator_step(state: ReplicatorState, game: MatrixGame, literal: bool = False) -> ReplicatorState:
    traj = _run(game, state.x, state.alpha, 1, literal)
    return ReplicatorState(traj[-1], state.t + 1, state.alpha)


def fitness(game: MatrixGame, x) -> tuple[np.ndarray, float]:
    """Per-strategy fitness M x and population mean x' M x."""
    f = game.payoff @ x
    return f, float(x @ f)


def replicator_run(
    x0,
    game: MatrixGame,
    alpha: float = ALPHA,
    steps: int = 10_000,
    literal: bool = False,
    sample_every: int = 1,
) -> TrajectoryRecord:
    traj = _run(game, x0, alpha, steps, literal)
    idx = np.arange(0, steps + 1, sample_every)
    if idx[-1] != steps:
        idx = np.append(idx, steps)
    freqs = traj[idx]
    payoff = np.einsum("ij,jk,ik->i", freqs, game.payoff, freqs)
    meta = {"model": "replicator", "game": game.title, "alpha": repr(float(alpha)), "literal": str(literal).lower()}
    return TrajectoryRecord(game.names, idx, freqs, payoff, meta)
