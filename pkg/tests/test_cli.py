import json
import subprocess
import sys

import numpy as np
import pytest

from neuropop.cli import main
from neuropop.games import load_game, noisy_ipd_game, save_game, MatrixGame
from neuropop.population import load_checkpoint
from neuropop.trajectory import TrajectoryRecord
from neuropop.window import read_ppm

FAST = ["--batch", "64", "--measure-samples", "500", "--latent", "3"]


def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_ess(capsys):
    code, out = run(["ess", "--game", "hawk-dove"], capsys)
    assert code == 0 and "Hawk=0.583333" in out


def test_ess_needs_two_strategies(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ess", "--game", "noisy-ipd"])
    assert exc.value.code == 2


def test_derive_ipd_round_trip(tmp_path, capsys):
    code, out = run(["derive-ipd", "--noise", "0.01", "--out", tmp_path / "ipd.txt"], capsys)
    assert code == 0
    game = load_game(tmp_path / "ipd.txt")
    assert game == noisy_ipd_game(0.01)
    assert MatrixGame.from_text(out) == game
    assert np.all((game.payoff >= 0) & (game.payoff <= 5))


def test_derive_ipd_monte_carlo_report(capsys):
    code, out = run(["derive-ipd", "--monte-carlo", "20000"], capsys)
    assert code == 0 and "max |stationary - monte carlo|" in out


def test_replicator_hand_step(tmp_path, capsys):
    code, _ = run(["simulate", "--game", "hawk-dove", "--model", "replicator", "--init", "0.5,0.5",
                   "--alpha", "0.01", "--steps", "1", "--out", tmp_path], capsys)
    assert code == 0
    rec = TrajectoryRecord.read_csv(tmp_path / "trajectory.csv")
    assert rec.steps.tolist() == [0, 1]
    assert rec.freqs[1, 0] == pytest.approx(0.5125, abs=1e-12)


def test_replicator_default_steps_reach_ess(tmp_path, capsys):
    code, out = run(["simulate", "--model", "replicator", "--init", "0.9,0.1", "--steps", "5000",
                     "--sample-every", "1000", "--out", tmp_path], capsys)
    assert code == 0
    assert "distance to ESS (Hawk 0.5833): 0.000" in out


@pytest.mark.parametrize("model", ["neural-mixed", "neural-quasi-pure"])
def test_simulate_is_byte_identical(tmp_path, capsys, model):
    args = ["simulate", "--game", "noisy-ipd", "--model", model, "--init", "uniform", "--steps", "30",
            "--sample-every", "10", "--seed", "3", *FAST]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert main(args[:-len(FAST) - 2] + ["--seed", "4", *FAST, "--out", str(tmp_path / "c")]) == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a != (tmp_path / "c" / "trajectory.csv").read_bytes()
    rec = TrajectoryRecord.read_csv(tmp_path / "a" / "trajectory.csv")
    assert rec.steps.tolist() == [0, 10, 20, 30]
    assert rec.meta["model"] == model and rec.meta["init_converged"] == "true"


def test_default_model_per_game(tmp_path, capsys):
    main(["simulate", "--game", "noisy-ipd", "--steps", "1", *FAST, "--out", str(tmp_path / "ipd")])
    main(["simulate", "--game", "hawk-dove", "--steps", "1", *FAST, "--out", str(tmp_path / "hd")])
    assert TrajectoryRecord.read_csv(tmp_path / "ipd" / "trajectory.csv").meta["model"] == "neural-quasi-pure"
    assert TrajectoryRecord.read_csv(tmp_path / "hd" / "trajectory.csv").meta["model"] == "neural-mixed"


def test_resume_continues_the_same_run(tmp_path, capsys):
    base = ["simulate", "--model", "neural-mixed", "--init", "0.3,0.7", "--sample-every", "5", *FAST]
    main(base + ["--steps", "20", "--out", str(tmp_path / "full")])
    main(base + ["--steps", "10", "--out", str(tmp_path / "half")])
    main(base + ["--steps", "10", "--resume", str(tmp_path / "half" / "model.npz"), "--out", str(tmp_path / "rest")])
    full = TrajectoryRecord.read_csv(tmp_path / "full" / "trajectory.csv")
    rest = TrajectoryRecord.read_csv(tmp_path / "rest" / "trajectory.csv")
    assert rest.steps.tolist() == [10, 15, 20]
    assert np.array_equal(rest.freqs, full.freqs[2:])


def test_checkpoints_written(tmp_path, capsys):
    main(["simulate", "--steps", "6", "--checkpoint-every", "3", *FAST, "--out", str(tmp_path)])
    assert sorted(p.name for p in tmp_path.glob("checkpoint_*.npz")) == ["checkpoint_0000003.npz", "checkpoint_0000006.npz"]
    assert load_checkpoint(tmp_path / "checkpoint_0000003.npz").step == 3


def test_game_file(tmp_path, capsys):
    save_game(MatrixGame(("a", "b"), [[0, 3], [1, 2]], "anti"), tmp_path / "g.txt")
    code, out = run(["ess", "--game-file", tmp_path / "g.txt"], capsys)
    assert code == 0 and "a=0.500000" in out
    code, _ = run(["simulate", "--game-file", tmp_path / "g.txt", "--model", "replicator", "--steps", "3",
                   "--out", tmp_path / "run"], capsys)
    assert TrajectoryRecord.read_csv(tmp_path / "run" / "trajectory.csv").names == ("a", "b")


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "replicator", "steps": 3, "init": "0.5,0.5", "out": str(tmp_path / "x")}))
    main(["--config", str(cfg), "simulate", "--steps", "7"])
    rec = TrajectoryRecord.read_csv(tmp_path / "x" / "trajectory.csv")
    assert rec.steps[-1] == 7 and rec.meta["model"] == "replicator"


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"stepz": 3}))
    with pytest.raises(SystemExit):
        main(["--config", str(cfg), "simulate"])


def test_invalid_values_are_usage_errors(tmp_path):
    for bad in (["--lr", "-1"], ["--epsilon", "1.5"], ["--init", "0.5,0.6"]):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", *bad, "--out", str(tmp_path)])
        assert exc.value.code == 2


def test_numerical_abort_exit_code(tmp_path, capsys):
    save_game(MatrixGame(("a", "b"), np.full((2, 2), 1e308)), tmp_path / "huge.txt")
    code = main(["simulate", "--game-file", str(tmp_path / "huge.txt"), "--steps", "2", "--out", str(tmp_path)])
    assert code == 1
    assert "numerical abort" in capsys.readouterr().err


def test_init_only_and_window_plot(tmp_path, capsys):
    code, out = run(["init-only", "--game", "hawk-dove", "--model", "neural-quasi-pure", "--init", "0.3,0.7",
                     "--latent", "2", "--out", tmp_path], capsys)
    assert code == 0 and "converged" in out
    code, _ = run(["window-plot", "--checkpoint", tmp_path / "model.npz", "--resolution", "24",
                   "--out", tmp_path / "w.ppm"], capsys)
    assert code == 0
    img = read_ppm(tmp_path / "w.ppm")
    assert img.shape == (24, 24, 3)


def test_window_plot_rejects_wide_latent(tmp_path, capsys):
    main(["init-only", "--game", "hawk-dove", "--init-max-iters", "1", "--out", str(tmp_path)])
    with pytest.raises(SystemExit):
        main(["window-plot", "--checkpoint", str(tmp_path / "model.npz"), "--out", str(tmp_path / "w.ppm")])


def test_seed_sweep(tmp_path, capsys):
    code, out = run(["simulate", "--model", "replicator", "--steps", "2", "--seeds", "1,2",
                     "--out", tmp_path], capsys)
    assert code == 0 and "seed 1:" in out and "seed 2:" in out
    assert (tmp_path / "seed_2" / "trajectory.csv").exists()


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "neuropop.cli", "ess"], capture_output=True, text=True, check=True)
    assert "Dove=0.416667" in out.stdout
