"""Command-line front end.

    neuropop simulate --game hawk-dove --model neural-quasi-pure --init 0.1,0.9 --steps 20000 --seed 7
    neuropop window-plot --checkpoint runs/model.npz --out window.ppm
    neuropop derive-ipd --noise 0.01 --out ipd.txt
    neuropop ess --game hawk-dove
    neuropop init-only --game noisy-ipd --init uniform --out runs/init

Any option may also come from a JSON file given with ``--config``; explicit
flags win over file values.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from neuropop import kernels
from neuropop.experiment import RunConfig, build_model, run_experiment
from neuropop.games import (
    IPD_NOISE,
    IPD_STRATEGIES,
    NoMixedESS,
    builtin_game,
    ess_2x2,
    load_game,
    monte_carlo_ipd_payoff,
    noisy_ipd_game,
)
from neuropop.optim import NonFiniteGradient
from neuropop.population import (
    TrainingDiverged,
    initialize_to,
    js_divergence,
    load_checkpoint,
    measure_frequencies,
    sample_population,
    save_checkpoint,
)
from neuropop.trajectory import MODEL_KINDS
from neuropop.window import render_window_plot, write_image

log = logging.getLogger("neuropop")


def _add_game_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--game", choices=["hawk-dove", "noisy-ipd"], default=None)
    g.add_argument("--game-file", type=Path, default=None, help="plain-text payoff matrix")
    p.add_argument("--noise", type=float, default=IPD_NOISE, help="move error rate for noisy-ipd")


def _add_model_args(p):
    p.add_argument("--model", choices=MODEL_KINDS, default=None,
                   help="default: neural-quasi-pure for noisy-ipd, neural-mixed otherwise")
    p.add_argument("--init", default=None, help="comma-separated start frequencies, or 'uniform'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--batch", type=int, default=2048)
    p.add_argument("--latent", type=int, default=10)
    p.add_argument("--hidden", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--init-tol", type=float, default=1e-4)
    p.add_argument("--init-max-iters", type=int, default=20_000)
    p.add_argument("--out", type=Path, default=Path("runs"))


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="neuropop", description="Neural population models of matrix games")
    parser.add_argument("--config", type=Path, default=None, help="JSON file of option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run replicator or neural dynamics and write a trajectory CSV")
    _add_game_args(sim)
    _add_model_args(sim)
    sim.add_argument("--steps", type=int, default=20_000)
    sim.add_argument("--alpha", type=float, default=0.01, help="replicator step size")
    sim.add_argument("--literal", action="store_true", help="replicator update without the x_i factor")
    sim.add_argument("--sample-every", type=int, default=None, help="default 1 (replicator) or 50 (neural)")
    sim.add_argument("--measure-samples", type=int, default=10_000)
    sim.add_argument("--checkpoint-every", type=int, default=0)
    sim.add_argument("--resume", type=Path, default=None, help="continue from a checkpoint")
    sim.add_argument("--seeds", default=None, help="sweep: comma-separated seeds, one sub-directory each")
    sim.add_argument("--jobs", type=int, default=1, help="parallel processes for --seeds")

    win = sub.add_parser("window-plot", help="render a church-window image from a checkpoint")
    win.add_argument("--checkpoint", type=Path, required=True)
    win.add_argument("--resolution", type=int, default=128)
    win.add_argument("--out", type=Path, default=Path("window.ppm"))

    ipd = sub.add_parser("derive-ipd", help="print the noisy IPD payoff matrix")
    ipd.add_argument("--noise", type=float, default=IPD_NOISE)
    ipd.add_argument("--out", type=Path, default=None)
    ipd.add_argument("--monte-carlo", type=int, default=0, metavar="ROUNDS",
                     help="cross-check every entry against a simulation of this many rounds")

    ess = sub.add_parser("ess", help="interior ESS of a 2-strategy game")
    _add_game_args(ess)

    ini = sub.add_parser("init-only", help="initialize a network to target frequencies and save it")
    _add_game_args(ini)
    _add_model_args(ini)
    return parser, {"simulate": sim, "window-plot": win, "derive-ipd": ipd, "ess": ess, "init-only": ini}


def parse_args(argv=None) -> argparse.Namespace:
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            values = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        # file values become defaults, then re-parse so explicit flags win
        sub = subparsers[args.command]
        unknown = set(values) - set(vars(args))
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key in ("game_file", "out", "checkpoint", "resume"):
            if values.get(key) is not None:
                values[key] = Path(values[key])
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    args.parser = parser
    return args


def _game(args):
    if args.game_file is not None:
        return load_game(args.game_file)
    return builtin_game(args.game or "hawk-dove", args.noise)


def _target(text, size):
    if text is None:
        return None
    if text == "uniform":
        return np.full(size, 1.0 / size)
    return np.array([float(v) for v in text.split(",")])


def _config(args, game) -> RunConfig:
    model = args.model or ("neural-quasi-pure" if game.title == "noisy-ipd" else "neural-mixed")
    return RunConfig(
        game=game, model=model, init=_target(args.init, game.size), steps=args.steps, seed=args.seed,
        alpha=args.alpha, literal=args.literal, lr=args.lr, beta1=args.beta1, beta2=args.beta2,
        batch=args.batch, latent=args.latent, hidden=args.hidden, epsilon=args.epsilon,
        sample_every=args.sample_every, measure_samples=args.measure_samples,
        init_tol=args.init_tol, init_max_iters=args.init_max_iters, checkpoint_every=args.checkpoint_every,
    )


def _summary(rec) -> str:
    last = ", ".join(f"{n}={v:.4f}" for n, v in zip(rec.names, rec.final))
    return f"step {rec.steps[-1]}: {last}; mean payoff {rec.mean_payoff[-1]:.4f}"


def _sweep_one(job):
    cfg, out = job
    rec = run_experiment(cfg, out)
    return cfg.seed, _summary(rec)


def cmd_simulate(args) -> int:
    game = _game(args)
    try:
        cfg = _config(args, game)
    except ValueError as exc:
        args.parser.error(str(exc))
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",")]
        jobs = [(replace(cfg, seed=s), args.out / f"seed_{s}") for s in seeds]
        with ProcessPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            for seed, line in pool.map(_sweep_one, jobs):
                print(f"seed {seed}: {line}")
        return 0
    rec = run_experiment(cfg, args.out, resume=args.resume)
    print(_summary(rec))
    if game.size == 2:
        try:
            ess = ess_2x2(game)
            print(f"distance to ESS ({game.names[0]} {ess[0]:.4f}): {abs(rec.final[0] - ess[0]):.4f}")
        except NoMixedESS:
            pass
    print(f"wrote {args.out / 'trajectory.csv'}")
    return 0


def cmd_window_plot(args) -> int:
    model = load_checkpoint(args.checkpoint)
    try:
        image = render_window_plot(model.params, args.resolution)
    except ValueError as exc:
        args.parser.error(str(exc))
    write_image(args.out, image)
    print(f"wrote {args.out} ({args.resolution}x{args.resolution})")
    return 0


def cmd_derive_ipd(args) -> int:
    game = noisy_ipd_game(args.noise)
    text = game.to_text()
    if args.out is not None:
        args.out.write_text(text)
    sys.stdout.write(text)
    if args.monte_carlo:
        strategies = list(IPD_STRATEGIES.values())
        worst = 0.0
        for i, a in enumerate(strategies):
            for j, b in enumerate(strategies):
                mc = monte_carlo_ipd_payoff(a, b, args.noise, args.monte_carlo, seed=4 * i + j)
                worst = max(worst, abs(mc - game.payoff[i, j]))
        print(f"# max |stationary - monte carlo| over 16 pairs ({args.monte_carlo} rounds): {worst:.5f}")
    return 0


def cmd_ess(args) -> int:
    game = _game(args)
    if game.size != 2:
        args.parser.error("ess needs a 2-strategy game")
    try:
        ess = ess_2x2(game)
    except NoMixedESS as exc:
        print(exc)
        return 1
    print(", ".join(f"{n}={v:.6f}" for n, v in zip(game.names, ess)))
    return 0


def cmd_init_only(args) -> int:
    game = _game(args)
    args.steps, args.alpha, args.literal, args.sample_every = 0, 0.01, False, None
    args.measure_samples, args.checkpoint_every = 10_000, 0
    try:
        cfg = _config(args, game)
    except ValueError as exc:
        args.parser.error(str(exc))
    if cfg.model == "replicator":
        args.parser.error("init-only needs a neural model")
    target = cfg.init if cfg.init is not None else np.full(game.size, 1.0 / game.size)
    model = build_model(cfg)
    result = initialize_to(model, target, cfg.init_tol, cfg.init_max_iters)
    freq = measure_frequencies(model)
    _, mean_out = sample_population(model)
    args.out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, args.out / "model.npz")
    state = "converged" if result.converged else "did NOT converge"
    print(f"{state} after {result.iterations} iterations, batch JSD {result.jsd:.3g}")
    print("measured: " + ", ".join(f"{n}={v:.4f}" for n, v in zip(game.names, freq)))
    print(f"JSD(target, mean output) = {js_divergence(target, mean_out):.3g}")
    print(f"wrote {args.out / 'model.npz'}")
    return 0 if result.converged else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "window-plot": cmd_window_plot,
    "derive-ipd": cmd_derive_ipd,
    "ess": cmd_ess,
    "init-only": cmd_init_only,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    log.info("kernel backend: %s", kernels.BACKEND)
    try:
        return COMMANDS[args.command](args)
    except (TrainingDiverged, NonFiniteGradient) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
