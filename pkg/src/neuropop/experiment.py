"""Configured runs: replicator baselines and neural self-play with sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from neuropop import kernels
from neuropop.games import MatrixGame, as_strategy
from neuropop.network import EPSILON, HIDDEN_UNITS
from neuropop.optim import LEARNING_RATE
from neuropop.population import (
    BATCH_SIZE,
    INIT_MAX_ITERS,
    INIT_TOL,
    LATENT_DIM,
    MEASURE_SAMPLES,
    InitResult,
    PopulationModel,
    initialize_to,
    sample_population,
    save_checkpoint,
    train_step,
)
from neuropop.replicator import ALPHA, replicator_run
from neuropop.trajectory import MODEL_KINDS, TrajectoryRecord

log = logging.getLogger(__name__)

NEURAL_SAMPLE_EVERY = 50


@dataclass
class RunConfig:
    game: MatrixGame
    model: str = "neural-mixed"
    init: np.ndarray | None = None
    steps: int = 20_000
    seed: int = 0
    alpha: float = ALPHA
    literal: bool = False
    lr: float = LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    batch: int = BATCH_SIZE
    latent: int = LATENT_DIM
    hidden: int = HIDDEN_UNITS
    epsilon: float = EPSILON
    sample_every: int | None = None
    measure_samples: int = MEASURE_SAMPLES
    init_tol: float = INIT_TOL
    init_max_iters: int = INIT_MAX_ITERS
    checkpoint_every: int = 0
    extra_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(MODEL_KINDS)}")
        if self.init is not None:
            self.init = as_strategy(self.init, self.game.size)
        for name in ("steps", "measure_samples", "init_max_iters", "checkpoint_every"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("alpha", "lr", "batch", "latent", "hidden", "init_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.sample_every is None:
            self.sample_every = 1 if self.model == "replicator" else NEURAL_SAMPLE_EVERY
        if self.sample_every < 1:
            raise ValueError("sample_every must be at least 1")

    @property
    def quasi_pure(self) -> bool:
        return self.model == "neural-quasi-pure"

    def metadata(self) -> dict:
        meta = {"model": self.model, "game": self.game.title, "seed": self.seed, "steps": self.steps}
        if self.model == "replicator":
            meta |= {"alpha": self.alpha, "literal": str(self.literal).lower()}
        else:
            meta |= {
                "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "batch": self.batch,
                "latent": self.latent, "hidden": self.hidden,
                "measure_samples": self.measure_samples, "backend": kernels.BACKEND,
            }
            if self.quasi_pure:
                meta["epsilon"] = self.epsilon
        if self.init is not None:
            meta["init"] = " ".join(f"{v:.12g}" for v in self.init)
        meta["sample_every"] = self.sample_every
        return meta | self.extra_meta


def build_model(cfg: RunConfig) -> PopulationModel:
    return PopulationModel.create(
        cfg.game, cfg.seed,
        latent_dim=cfg.latent, hidden=cfg.hidden, quasi_pure=cfg.quasi_pure,
        epsilon=cfg.epsilon, batch_size=cfg.batch, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2,
    )


def run_replicator(cfg: RunConfig) -> TrajectoryRecord:
    x0 = cfg.init if cfg.init is not None else np.full(cfg.game.size, 1.0 / cfg.game.size)
    rec = replicator_run(x0, cfg.game, cfg.alpha, cfg.steps, cfg.literal, cfg.sample_every)
    rec.meta = cfg.metadata()
    return rec


@dataclass
class NeuralRun:
    trajectory: TrajectoryRecord
    model: PopulationModel
    init: InitResult | None


def run_neural(cfg: RunConfig, model: PopulationModel | None = None, checkpoint_dir=None) -> NeuralRun:
    """Optional initialization to ``cfg.init``, then ``cfg.steps`` self-play updates.

    A sample row is recorded before the first update, every ``sample_every``
    updates and after the last one.
    """
    init_result = None
    if model is None:
        model = build_model(cfg)
        if cfg.init is not None:
            init_result = initialize_to(model, cfg.init, cfg.init_tol, cfg.init_max_iters)
    steps, freqs, payoffs = [], [], []

    def sample():
        freq, mean_out = sample_population(model, cfg.measure_samples)
        steps.append(model.step)
        freqs.append(freq)
        payoffs.append(float(mean_out @ cfg.game.payoff @ mean_out))

    start = model.step
    sample()
    for k in range(1, cfg.steps + 1):
        train_step(model)
        if k % cfg.sample_every == 0 or k == cfg.steps:
            sample()
        if checkpoint_dir is not None and cfg.checkpoint_every and k % cfg.checkpoint_every == 0:
            save_checkpoint(model, Path(checkpoint_dir) / f"checkpoint_{start + k:07d}.npz")
    meta = cfg.metadata()
    if init_result is not None:
        meta |= {"init_converged": str(init_result.converged).lower(), "init_iterations": init_result.iterations}
    rec = TrajectoryRecord(cfg.game.names, steps, np.array(freqs), payoffs, meta)
    return NeuralRun(rec, model, init_result)


def run_experiment(cfg: RunConfig, out_dir, resume=None) -> TrajectoryRecord:
    """Run ``cfg`` and write ``trajectory.csv`` (and ``model.npz`` for neural runs) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.model == "replicator":
        rec = run_replicator(cfg)
    else:
        model = None
        if resume is not None:
            from neuropop.population import load_checkpoint

            model = load_checkpoint(resume)
            if model.kind != cfg.model or model.game != cfg.game:
                raise ValueError("checkpoint does not match the requested game and model")
            cfg = replace(cfg, init=None)
        run = run_neural(cfg, model, checkpoint_dir=out)
        rec = run.trajectory
        save_checkpoint(run.model, out / "model.npz")
    rec.write_csv(out / "trajectory.csv")
    return rec


def in_band_tail(values, centre: float, half_width: float, tail: float = 0.2) -> bool:
    """True if the last ``tail`` share of ``values`` all lie within centre +/- half_width."""
    values = np.asarray(values)
    k = max(1, int(np.ceil(len(values) * tail)))
    return bool(np.all(np.abs(values[-k:] - centre) <= half_width))
