import json

import numpy as np
import pytest

from hqnlab import bench, cli
from hqnlab.controller import ConfigError, HQNConfig
from hqnlab.fileio import (FileError, atomic_write, load_config, read_csv, read_grid_csv,
                           read_schedule)
from hqnlab.modelnet import ModelConfig
from hqnlab.oracle import oracle_grid, solve_retrograde
from hqnlab.qagent import QTable

from .helpers import oracle_model

TINY = dict(steps=2, hqn_games=100, q_games=100, q_dims=(8, 8), qnet_games=50,
            hqn_eval_dims=(20, 20))


def test_comparison_zero_steps_and_shape():
    out = bench.run_comparison(bench.ComparisonConfig(steps=0), np.random.default_rng(0))
    assert out == {"hqn": [], "q": [], "qnet": []}
    out = bench.run_comparison(bench.ComparisonConfig(**TINY), np.random.default_rng(0))
    for agent, recs in out.items():
        assert [r.period for r in recs] == [0, 1]
        assert all(r.agent == agent and 0 <= r.move_accuracy <= 1 for r in recs)
        assert recs[0].games < recs[1].games


def test_comparison_deterministic_excluding_wallclock():
    runs = [bench.run_comparison(bench.ComparisonConfig(**TINY), np.random.default_rng(4))
            for _ in range(2)]
    strip = lambda out: {a: [r.row()[:2] + r.row()[3:] for r in rs] for a, rs in out.items()}
    assert strip(runs[0]) == strip(runs[1])


def test_comparison_config_validation():
    with pytest.raises(ConfigError):
        bench.ComparisonConfig(steps=-1)
    with pytest.raises(ConfigError):
        bench.ComparisonConfig(q_dims=(1, 5))


def test_two_proportion_test():
    assert bench.two_proportion_test(0.5, 100, 0.5, 100) == pytest.approx(1.0)
    assert bench.two_proportion_test(0.9, 500, 0.1, 500) < 1e-10
    # z = 0.1 / sqrt(0.15 * 0.85 * 2 / 200) = 2.8006
    assert bench.two_proportion_test(0.2, 200, 0.1, 200) == pytest.approx(0.0051, abs=2e-4)


def test_dimension_sweep_oracle_model():
    rows = bench.run_dimension_sweep(oracle_model("nim"), [5, 40])
    assert [r[0] for r in rows] == [5, 40]
    assert all(r[1] == 1.0 and r[2] == 1.0 for r in rows)
    with pytest.raises(ConfigError):
        bench.run_dimension_sweep(oracle_model(), [1])


def test_heatmaps():
    assert np.all(bench.qtable_heatmap(QTable(), 6, 6) == 0)
    text = bench.render_heatmap(np.array([[0.0, 0.05, 0.5], [0.95, 1.0, 0.3]]))
    assert text == "  +\n@@-\n"
    with pytest.raises(ValueError):
        bench.render_heatmap(np.array([[np.nan]]))
    vals = bench.model_heatmap(oracle_model(), 30, 30)
    g = oracle_grid("wythoff", 30, 30)
    assert np.array_equal(vals == 0, g.cold)


def test_cycle_report():
    from hqnlab.controller import ExperimentRecord
    from hqnlab.games import Rules
    mk = lambda p, g, drop=False, recall=False, perf=0.0: ExperimentRecord(
        p, p, perf, 0, 0, Rules.parse(g), drop=drop, recall=recall)
    recs = [mk(0, "wythoff"), mk(1, "nim"), mk(2, "nim", drop=True), mk(3, "euclid"),
            mk(4, "euclid"), mk(5, "euclid", drop=True), mk(6, "wythoff", True, True, 0.95)]
    rep = bench.cycle_report(recs)
    assert [(r["to"], r["drop"], r["recovered"]) for r in rep] == [
        ("nim", True, False), ("euclid", False, False), ("wythoff", True, True)]
    assert [r["cycle"] for r in rep] == [1, 1, 2]


def test_rule_cycle_config():
    with pytest.raises(ConfigError):
        bench.RuleCycleConfig(cycle=())
    with pytest.raises(ValueError):
        bench.RuleCycleConfig(cycle=("chess",))
    cfg = bench.RuleCycleConfig(cycle=("nim",), hqn=HQNConfig(
        periods=2, games_per_period=50, model=ModelConfig(iteration_range=(50, 60), trials=10)))
    recs = list(bench.run_rule_cycle(cfg, np.random.default_rng(0)))
    assert len(recs) == 2 and all(r.rules.value == "nim" for r in recs)


# -- files --------------------------------------------------------------------

def test_atomic_write_and_readers(tmp_path):
    p = tmp_path / "sub" / "x.txt"
    atomic_write(p, "hello\n")
    assert p.read_text() == "hello\n"
    assert list(p.parent.iterdir()) == [p]
    with pytest.raises(FileError):
        read_csv(tmp_path / "missing.csv")


def test_schedule_and_config_files(tmp_path):
    s = tmp_path / "sched.txt"
    s.write_text("# cycle\n0,wythoff\n40, nim\n")
    assert {k: v.value for k, v in read_schedule(s).items()} == {0: "wythoff", 40: "nim"}
    s.write_text("0;nim\n")
    with pytest.raises(ValueError):
        read_schedule(s)
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"games-per-period": 5}))
    assert load_config(c) == {"games_per_period": 5}
    c.write_text("[1]")
    with pytest.raises(ValueError):
        load_config(c)


# -- command line ---------------------------------------------------------------

def run(*argv):
    return cli.main([str(a) for a in argv])


def test_cli_solve_roundtrip(tmp_path):
    out = tmp_path / "g.csv"
    assert run("solve", "--game", "euclid", "--rows", 9, "--cols", 7, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config") and lines[1] == "rows,cols,game"
    assert lines[2] == "9,7,euclid" and len(lines) == 3 + 9
    rules, hot = read_grid_csv(out)
    assert np.array_equal(hot, solve_retrograde("euclid", 9, 7).hot)


def test_cli_heatmap_from_labels(tmp_path):
    run("solve", "--rows", 6, "--cols", 6, "--out", tmp_path / "g.csv")
    assert run("heatmap", "--labels", tmp_path / "g.csv", "--out", tmp_path / "h.csv") == 0
    header, rows = read_csv(tmp_path / "h.csv")
    vals = np.array(rows, dtype=float)
    assert set(np.unique(vals)) <= {0.0, 1.0}
    assert np.array_equal(vals == 0, solve_retrograde("wythoff", 6, 6).cold)
    assert (tmp_path / "h.txt").read_text().count("\n") == 6


def test_cli_train_hqn_header(tmp_path):
    out = tmp_path / "r.csv"
    sched = tmp_path / "s.txt"
    sched.write_text("0,wythoff\n1,nim\n")
    assert run("train-hqn", "--seed", 1, "--periods", 2, "--games-per-period", 50,
               "--eval-rows", 20, "--eval-cols", 20, "--rule-schedule", sched,
               "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["period", "games", "best_perf", "model_accuracy", "move_accuracy",
                      "rules"]
    assert [r[-1] for r in rows] == ["wythoff", "nim"]


def test_cli_errors(tmp_path, capsys):
    assert run("train-q", "--out", tmp_path / "q.csv") == 2
    cfg = tmp_path / "c.json"
    cfg.write_text('{"rows": 5, "nonsense": 1}')
    assert run("train-q", "--seed", 0, "--config", cfg, "--out", tmp_path / "q.csv") == 2
    cfg.write_text('{"game": "chess"}')
    assert run("train-q", "--seed", 0, "--config", cfg, "--out", tmp_path / "q.csv") == 2
    assert run("solve", "--rows", 100, "--cols", 100, "--max-cells", 10,
               "--out", tmp_path / "g.csv") == 3
    assert run("dimension-sweep", "--model", tmp_path / "none.json",
               "--out", tmp_path / "d.csv") == 2
    assert run("heatmap", "--qtable", tmp_path / "none.csv", "--out", tmp_path / "h.csv") == 2


def test_cli_config_defaults_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"rows": 4, "cols": 4, "games": 200, "seed": 3}')
    assert run("train-q", "--config", cfg, "--cols", 5, "--out", tmp_path / "q.csv") == 0
    first = (tmp_path / "q.csv").read_text().splitlines()[0]
    conf = json.loads(first[len("# config "):])
    assert conf["rows"] == 4 and conf["cols"] == 5 and conf["seed"] == 3


def test_cli_numerical_failure_exit(tmp_path, monkeypatch):
    from hqnlab.mlp import NumericalError

    def boom(args):
        raise NumericalError("weights diverged")
    monkeypatch.setitem(cli.COMMANDS, "solve", boom)
    assert run("solve", "--out", tmp_path / "x.csv") == 4
