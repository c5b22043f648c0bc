"""Symmetric matrix games, mixed-strategy payoffs and the two built-in games.

Strategy vectors are plain 1-D float arrays on the probability simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from neuropop import kernels

SIMPLEX_ATOL = 1e-9

# Axelrod's canonical prisoner's dilemma values (T, R, P, S)
AXELROD_PAYOFFS = (5.0, 3.0, 1.0, 0.0)
HAWK_DOVE_BASE = ((-25.0, 50.0), (0.0, 15.0))
HAWK_DOVE_SHIFT = 26.0
IPD_NOISE = 0.01

C, D = 0, 1


class NoMixedESS(ValueError):
    """Raised when a 2x2 game has no interior evolutionarily stable mix."""


def as_strategy(v, size: int | None = None, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Validate ``v`` as a point on the simplex and return it as a float array."""
    x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"strategy vector must be 1-D, got shape {x.shape}")
    if size is not None and len(x) != size:
        raise ValueError(f"strategy vector has {len(x)} entries, expected {size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("strategy vector has non-finite entries")
    if np.any(x < -atol) or np.any(x > 1 + atol):
        raise ValueError(f"strategy entries must lie in [0, 1]: {x}")
    if abs(x.sum() - 1.0) > atol:
        raise ValueError(f"strategy entries must sum to 1, got {x.sum()!r}")
    return x


@dataclass(frozen=True)
class MatrixGame:
    """Symmetric two-player game; ``payoff[i, j]`` is what strategy i earns against j."""

    names: tuple[str, ...]
    payoff: np.ndarray = field(repr=False)
    title: str = "custom"

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        payoff = np.array(self.payoff, dtype=np.float64)
        if len(names) < 2:
            raise ValueError("a game needs at least two strategies")
        if payoff.shape != (len(names), len(names)):
            raise ValueError(f"payoff shape {payoff.shape} does not match {len(names)} strategies")
        if not np.all(np.isfinite(payoff)):
            raise ValueError("payoff entries must be finite")
        payoff.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "payoff", payoff)

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def entry(self, row: str, col: str) -> float:
        return float(self.payoff[self.index(row), self.index(col)])

    def shifted(self, c: float) -> MatrixGame:
        return MatrixGame(self.names, self.payoff + c, self.title)

    def __eq__(self, other):
        if not isinstance(other, MatrixGame):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.payoff, other.payoff)

    def __hash__(self):
        return hash((self.names, self.payoff.tobytes()))

    def to_text(self) -> str:
        """Plain-text form: a header of names, then one comma-separated row per line."""
        lines = [",".join(self.names)]
        lines += [",".join(repr(float(v)) for v in row) for row in self.payoff]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, title: str = "custom") -> MatrixGame:
        rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if len(rows) < 3:
            raise ValueError("game text needs a name line and at least two payoff rows")
        names = [n.strip() for n in rows[0].split(",")]
        try:
            payoff = [[float(v) for v in row.split(",")] for row in rows[1:]]
        except ValueError as exc:
            raise ValueError(f"unparseable payoff row: {exc}") from None
        if any(len(r) != len(names) for r in payoff):
            raise ValueError("every payoff row needs one entry per strategy")
        return cls(tuple(names), np.array(payoff), title)


def load_game(path) -> MatrixGame:
    path = Path(path)
    return MatrixGame.from_text(path.read_text(), title=path.stem)


def save_game(game: MatrixGame, path) -> None:
    Path(path).write_text(game.to_text())


def mixed_payoff(game: MatrixGame, s1, s2) -> float:
    """Expected payoff of ``s1`` against ``s2`` (the bilinear form s1' M s2)."""
    x = as_strategy(s1, game.size)
    y = as_strategy(s2, game.size)
    return float(x @ game.payoff @ y)


def hawk_dove(shift: float = HAWK_DOVE_SHIFT) -> MatrixGame:
    """Hawk-Dove with resource 50, injury cost 100, display cost 10, shifted positive."""
    return MatrixGame(("Hawk", "Dove"), np.array(HAWK_DOVE_BASE) + shift, "hawk-dove")


def ess_2x2(game: MatrixGame) -> np.ndarray:
    """Interior ESS of a 2x2 game by the indifference condition.

    Only stable interior rest points count: a mixed Nash point of a
    coordination game is rejected as well as dominance solvable games.
    """
    if game.size != 2:
        raise ValueError("ess_2x2 needs a 2-strategy game")
    (a, b), (c, d) = game.payoff
    denom = a - b - c + d
    if denom == 0:
        raise NoMixedESS("no mixed ESS: payoff differences are constant")
    p = (d - b) / denom
    if not 0.0 < p < 1.0:
        raise NoMixedESS(f"no mixed ESS: indifference point {p:.6g} is not interior")
    if denom > 0:
        raise NoMixedESS(f"no mixed ESS: interior rest point {p:.6g} is unstable")
    return np.array([p, 1.0 - p])


class MemoryOneStrategy(NamedTuple):
    """Deterministic reactive strategy: reply to the opponent's last realised move."""

    on_cooperate: int
    on_defect: int
    opening: int = C

    @property
    def responses(self) -> np.ndarray:
        return np.array([self.on_cooperate, self.on_defect], dtype=np.int64)


ALL_C = MemoryOneStrategy(C, C, C)
TFT = MemoryOneStrategy(C, D, C)
ATFT = MemoryOneStrategy(D, C, D)
ALL_D = MemoryOneStrategy(D, D, D)
IPD_STRATEGIES = {"All-C": ALL_C, "TFT": TFT, "ATFT": ATFT, "All-D": ALL_D}

# joint outcomes ordered CC, CD, DC, DD (player 1's move first)
OUTCOMES = ((C, C), (C, D), (D, C), (D, D))


def _check_ipd_args(noise: float, base_payoffs: Sequence[float]) -> tuple[float, ...]:
    if not 0.0 < noise < 0.5:
        raise ValueError(f"noise must lie in (0, 0.5), got {noise}")
    T, R, P, S = (float(v) for v in base_payoffs)
    if not T > R > P > S:
        raise ValueError(f"payoffs must satisfy T > R > P > S, got {(T, R, P, S)}")
    return T, R, P, S


def outcome_payoffs(base_payoffs: Sequence[float] = AXELROD_PAYOFFS) -> np.ndarray:
    """Player-1 payoff per joint outcome, in ``OUTCOMES`` order."""
    T, R, P, S = base_payoffs
    return np.array([R, S, T, P], dtype=np.float64)


def ipd_transition_matrix(s1: MemoryOneStrategy, s2: MemoryOneStrategy, noise: float) -> np.ndarray:
    """Row-stochastic transition matrix over joint outcomes of the noisy game."""
    K = np.empty((4, 4))
    for i, (a, b) in enumerate(OUTCOMES):
        want1 = s1.responses[b]
        want2 = s2.responses[a]
        for j, (a2, b2) in enumerate(OUTCOMES):
            p1 = 1.0 - noise if a2 == want1 else noise
            p2 = 1.0 - noise if b2 == want2 else noise
            K[i, j] = p1 * p2
    return K


def stationary_distribution(K: np.ndarray) -> np.ndarray:
    """Solve pi K = pi with sum(pi) = 1 directly; K must be ergodic."""
    n = len(K)
    A = K.T - np.eye(n)
    A[-1] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(A, rhs)


def noisy_ipd_payoff(
    s1: MemoryOneStrategy,
    s2: MemoryOneStrategy,
    noise: float = IPD_NOISE,
    base_payoffs: Sequence[float] = AXELROD_PAYOFFS,
) -> float:
    """Long-run mean payoff per round to ``s1`` in the infinitely repeated noisy game."""
    base = _check_ipd_args(noise, base_payoffs)
    pi = stationary_distribution(ipd_transition_matrix(s1, s2, noise))
    return float(pi @ outcome_payoffs(base))


def noisy_ipd_game(noise: float = IPD_NOISE, base_payoffs: Sequence[float] = AXELROD_PAYOFFS) -> MatrixGame:
    strategies = list(IPD_STRATEGIES.values())
    payoff = [[noisy_ipd_payoff(a, b, noise, base_payoffs) for b in strategies] for a in strategies]
    return MatrixGame(tuple(IPD_STRATEGIES), np.array(payoff), "noisy-ipd")


def monte_carlo_ipd_payoff(
    s1: MemoryOneStrategy,
    s2: MemoryOneStrategy,
    noise: float = IPD_NOISE,
    rounds: int = 1_000_000,
    seed: int = 0,
    base_payoffs: Sequence[float] = AXELROD_PAYOFFS,
) -> float:
    """Mean payoff to ``s1`` over ``rounds`` simulated noisy rounds.

    Independent of the Markov-chain solution; used to cross-check it.
    """
    base = _check_ipd_args(noise, base_payoffs)
    draws = np.random.default_rng(seed).random((rounds, 2))
    return float(
        kernels.ipd_monte_carlo(
            s1.responses, s2.responses, draws, float(noise),
            outcome_payoffs(base), int(s1.opening), int(s2.opening),
        )
    )


def builtin_game(name: str, noise: float = IPD_NOISE) -> MatrixGame:
    if name == "hawk-dove":
        return hawk_dove()
    if name == "noisy-ipd":
        return noisy_ipd_game(noise)
    raise ValueError(f"unknown game {name!r}; expected 'hawk-dove' or 'noisy-ipd'")
