"""Command-line front end.

Every subcommand accepts ``--seed``, ``--config FILE`` (flat JSON whose keys
are the subcommand's long options) and ``--out PATH``. Explicit flags win over
the config file; unknown config keys are errors.

Exit codes: 0 success, 2 configuration or input error, 3 resource limit,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .controller import ConfigError, ControllerState, HQNConfig, run_hqn
from .fileio import (FileError, atomic_write, csv_text, grid_csv, load_config, read_grid_csv,
                     read_schedule, read_text)
from .games import Rules
from .mlp import NumericalError
from .modelnet import Model, ModelConfig, classification_accuracy, evaluate_model, move_accuracy
from .oracle import ResourceLimit, oracle_grid, random_move_baseline, solve_retrograde
from .qagent import AgentParams, QTable, greedy_accuracy, train
from .qnetwork import QNet, QNetParams, qnet_policy_accuracy, qnet_step

log = logging.getLogger("hqnlab")

EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERIC = 2, 3, 4
NEEDS_SEED = {"train-q", "train-qnet", "train-hqn", "eval-model", "rule-cycle"}
GAMES = [r.value for r in Rules]


def _dims(text: str):
    try:
        vals = [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _games_map(text: str) -> dict:
    out = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        try:
            game, n = item.split("=")
            out[Rules.parse(game).value] = int(n)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected game=count pairs, got {item!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="RNG seed (required for train/eval)")
    common.add_argument("--config", help="flat JSON file of option defaults")
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hqnlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="label a board hot/cold")
    s.add_argument("--game", choices=GAMES, default="wythoff")
    s.add_argument("--rows", type=int, default=12)
    s.add_argument("--cols", type=int, default=12)
    s.add_argument("--max-cells", type=int, default=10_000_000)

    s = sub.add_parser("train-q", parents=[common], help="tabular Q-learning self-play")
    s.add_argument("--game", choices=GAMES, default="wythoff")
    s.add_argument("--rows", type=int, default=12)
    s.add_argument("--cols", type=int, default=12)
    s.add_argument("--games", type=int, default=50_000)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--beta", type=float, default=0.7)

    s = sub.add_parser("train-qnet", parents=[common], help="Q-Network baseline")
    s.add_argument("--game", choices=GAMES, default="wythoff")
    s.add_argument("--rows", type=int, default=12)
    s.add_argument("--cols", type=int, default=12)
    s.add_argument("--games", type=int, default=20_000)
    s.add_argument("--eval-every", type=int, default=1000)
    s.add_argument("--encoding", choices=["norm", "onehot"], default="norm")
    s.add_argument("--replay", action="store_true")

    s = sub.add_parser("train-hqn", parents=[common], help="hierarchical Q-network training")
    s.add_argument("--game", choices=GAMES, default="wythoff")
    s.add_argument("--rows", type=int, default=12)
    s.add_argument("--cols", type=int, default=12)
    s.add_argument("--periods", type=int, default=40)
    s.add_argument("--games-per-period", type=int, default=2000)
    s.add_argument("--eval-rows", type=int, default=50)
    s.add_argument("--eval-cols", type=int, default=50)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--rule-schedule", help="file of 'period_index,game_name' lines")
    s.add_argument("--model-out", help="write the final best model (JSON)")

    s = sub.add_parser("eval-model", parents=[common], help="score a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--game", choices=GAMES, help="defaults to the model's training game")
    s.add_argument("--rows", type=int, default=50)
    s.add_argument("--cols", type=int, default=50)
    s.add_argument("--qtable", help="Q-table CSV for the win-ratio score")
    s.add_argument("--trials", type=int, default=100)

    s = sub.add_parser("dimension-sweep", parents=[common], help="accuracy across board sizes")
    s.add_argument("--model", required=True)
    s.add_argument("--dims", type=_dims, default=[12, 25, 50, 100, 200, 300])

    s = sub.add_parser("rule-cycle", parents=[common], help="HQN across a cycle of games")
    s.add_argument("--cycle", default="wythoff,nim,euclid,wythoff,nim,euclid")
    s.add_argument("--threshold", type=float, default=0.9)
    s.add_argument("--periods", type=int, default=400)
    s.add_argument("--games-per-rules", type=_games_map,
                   default={"wythoff": 1000, "nim": 250, "euclid": 250})
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--rows", type=int, default=12)
    s.add_argument("--cols", type=int, default=12)
    s.add_argument("--eval-rows", type=int, default=50)
    s.add_argument("--eval-cols", type=int, default=50)

    s = sub.add_parser("heatmap", parents=[common], help="per-cell grid plus text rendering")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--qtable")
    src.add_argument("--labels", help="grid written by 'solve'")
    s.add_argument("--game", choices=GAMES, default="wythoff")
    s.add_argument("--rows", type=int, default=50)
    s.add_argument("--cols", type=int, default=50)
    return p


def parse_args(argv=None) -> argparse.Namespace:
    """Parse, then fold in ``--config`` values for options not given explicitly."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        dests = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        cfg = load_config(args.config)
        unknown = sorted(set(cfg) - set(dests))
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        given = _explicit_dests(sub, argv)
        for k, v in cfg.items():
            if k in given:
                continue
            action = dests[k]
            if action.type is not None and isinstance(v, str):
                v = action.type(v)
            if action.choices is not None and v not in action.choices:
                raise ConfigError(f"config {k}={v!r} not in {list(action.choices)}")
            setattr(args, k, v)
    if args.command in NEEDS_SEED and args.seed is None:
        raise ConfigError(f"{args.command} requires --seed")
    return args


def _explicit_dests(sub, argv) -> set:
    argv = list(sys.argv[1:] if argv is None else argv)
    flags = {a.split("=")[0] for a in argv if a.startswith("-")}
    return {a.dest for a in sub._actions if flags & set(a.option_strings)}


def _config_dict(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("config", "verbose", "out")}
    return d


def _require_out(args):
    if not args.out:
        raise ConfigError(f"{args.command} requires --out")
    return Path(args.out)


def _load_model(path) -> Model:
    try:
        return Model.from_json(read_text(path))
    except (KeyError, ValueError) as exc:
        raise FileError(f"{path}: not a model file ({exc})") from exc


def _load_qtable(path) -> QTable:
    try:
        with open(path) as fh:
            return QTable.from_csv(fh)
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc


# -- subcommands --------------------------------------------------------------

def cmd_solve(args):
    out = _require_out(args)
    grid = solve_retrograde(args.game, args.rows, args.cols, max_cells=args.max_cells)
    atomic_write(out, grid_csv(grid.cold, grid.rules, _config_dict(args)))
    print(f"{args.game} {args.rows}x{args.cols}: {int(grid.cold.sum())} cold cells")


def cmd_train_q(args):
    out = _require_out(args)
    rng = np.random.default_rng(args.seed)
    q = QTable()
    train(q, args.games, AgentParams(alpha=args.alpha, beta=args.beta), args.rows, args.cols,
          rng, args.game)
    acc = greedy_accuracy(q, oracle_grid(args.game, args.rows, args.cols))
    atomic_write(out, _qtable_text(q, _config_dict(args)))
    print(f"move accuracy {acc:.4f} on {args.rows}x{args.cols}")


def _qtable_text(q, config) -> str:
    import io
    from .fileio import config_comment
    buf = io.StringIO()
    buf.write(config_comment(config))
    q.to_csv(buf)
    return buf.getvalue()


def cmd_train_qnet(args):
    out = _require_out(args)
    if args.eval_every < 1:
        raise ConfigError("--eval-every must be positive")
    rng = np.random.default_rng(args.seed)
    rules = Rules.parse(args.game)
    params = QNetParams(encoding=args.encoding, replay=args.replay)
    dims = (args.rows, args.cols)
    qnet = QNet.create(dims, rng, params)
    grid = oracle_grid(rules, *dims)
    rows, played, step = [], 0, 0
    import time
    t0 = time.perf_counter()
    while played < args.games:
        n = min(args.eval_every, args.games - played)
        for _ in range(n):
            qnet_step(qnet, grid, params, rng, rules)
        played += n
        rows.append(bench.AgentRecord(step, played, int(1000 * (time.perf_counter() - t0)),
                                      "qnet", rules, 0.0, 0.0,
                                      qnet_policy_accuracy(qnet, grid, rules)).row())
        step += 1
    atomic_write(out, csv_text(bench.RECORD_HEADER, rows, _config_dict(args)))
    acc = rows[-1][-1] if rows else qnet_policy_accuracy(qnet, grid, rules)
    p = bench.random_baseline_test(acc, grid)
    print(f"move accuracy {acc:.4f}; random baseline {random_move_baseline(grid):.4f}; "
          f"two-proportion p={p:.3g}")


def _hqn_config(args, **extra) -> HQNConfig:
    model = ModelConfig(train_dims=(args.rows, args.cols),
                        eval_dims=(args.eval_rows, args.eval_cols),
                        trials=getattr(args, "trials", 100))
    return HQNConfig(model=model, delta=args.delta, **extra)


def cmd_train_hqn(args):
    out = _require_out(args)
    rng = np.random.default_rng(args.seed)
    schedule = read_schedule(args.rule_schedule) if args.rule_schedule else None
    config = _hqn_config(args, rules=Rules.parse(args.game), periods=args.periods,
                         games_per_period=args.games_per_period)
    records, state = [], ControllerState()
    for rec in run_hqn(config, rng, schedule=schedule, state=state):
        records.append(rec)
        log.info("period %d %s best_perf=%.2f move_acc=%.3f", rec.period, rec.rules.value,
                 rec.best_perf, rec.move_accuracy)
    atomic_write(out, csv_text(bench.HQN_HEADER, bench.hqn_rows(records), _config_dict(args)))
    if args.model_out:
        if state.best_model is None or state.best_model.net is None:
            raise ConfigError("no model was adopted; nothing to write to --model-out")
        atomic_write(args.model_out, state.best_model.to_json())
    if records:
        r = records[-1]
        print(f"final best_perf {r.best_perf:.2f}, model accuracy {r.model_accuracy:.4f}, "
              f"move accuracy {r.move_accuracy:.4f}")


def cmd_eval_model(args):
    out = _require_out(args)
    rng = np.random.default_rng(args.seed)
    model = _load_model(args.model)
    if model.net is None:
        raise ConfigError(f"{args.model} holds no network")
    rules = Rules.parse(args.game or model.trained_on)
    grid = oracle_grid(rules, args.rows, args.cols)
    perf = ""
    if args.qtable:
        perf = evaluate_model(model, _load_qtable(args.qtable), args.trials, rules,
                              (args.rows, args.cols), rng)
    row = [args.rows, args.cols, rules, classification_accuracy(model, grid),
           move_accuracy(model, grid), random_move_baseline(grid), perf]
    atomic_write(out, csv_text(["rows", "cols", "game", "model_accuracy", "move_accuracy",
                                "random_baseline", "perf"], [row], _config_dict(args)))
    print(f"model accuracy {row[3]:.4f}, move accuracy {row[4]:.4f}")


def cmd_dimension_sweep(args):
    out = _require_out(args)
    model = _load_model(args.model)
    if model.net is None:
        raise ConfigError(f"{args.model} holds no network")
    rows = bench.run_dimension_sweep(model, args.dims)
    atomic_write(out, csv_text(bench.SWEEP_HEADER, rows, _config_dict(args)))
    for d, ca, ma, rb in rows:
        print(f"{d}x{d}: model accuracy {ca:.4f}, move accuracy {ma:.4f} (random {rb:.4f})")


def cmd_rule_cycle(args):
    out = _require_out(args)
    rng = np.random.default_rng(args.seed)
    cycle = tuple(Rules.parse(g).value for g in args.cycle.split(",") if g.strip())
    hcfg = _hqn_config(args, periods=args.periods, games_per_rules=dict(args.games_per_rules))
    config = bench.RuleCycleConfig(cycle=cycle, switch_threshold=args.threshold, hqn=hcfg)
    records = list(bench.run_rule_cycle(config, rng))
    atomic_write(out, csv_text(bench.CYCLE_HEADER, bench.cycle_rows(records),
                               _config_dict(args)))
    switches = bench.switch_events(records)
    print(f"{len(records)} periods, {len(switches)} switches, "
          f"{sum(r.drop for r in records)} drops, {sum(r.recall for r in records)} recalls")


def cmd_heatmap(args):
    out = _require_out(args)
    if args.model:
        values = bench.model_heatmap(_load_model(args.model), args.rows, args.cols)
    elif args.qtable:
        values = bench.qtable_heatmap(_load_qtable(args.qtable), args.rows, args.cols, args.game)
    else:
        _, hot = read_grid_csv(args.labels)
        values = hot.astype(float)
    atomic_write(out, csv_text([f"c{j}" for j in range(values.shape[1])],
                               bench.heatmap_csv_rows(values), _config_dict(args)))
    atomic_write(out.with_suffix(".txt"), bench.render_heatmap(values))
    print(f"wrote {out} and {out.with_suffix('.txt')}")


COMMANDS = {
    "solve": cmd_solve,
    "train-q": cmd_train_q,
    "train-qnet": cmd_train_qnet,
    "train-hqn": cmd_train_hqn,
    "eval-model": cmd_eval_model,
    "dimension-sweep": cmd_dimension_sweep,
    "rule-cycle": cmd_rule_cycle,
    "heatmap": cmd_heatmap,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except (ConfigError, ValueError, FileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, FileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
