"""Experiment harness: agent comparison, dimension sweep, rule cycle, heatmaps.

Every accuracy here is measured against an oracle grid, never against another
agent. Budgets are game counts; wallclock is recorded but never compared.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy import stats

from .controller import (ConfigError, ControllerState, HQNConfig, ModelMemory, learn_step,
                         run_hqn)
from .games import Rules
from .modelnet import Model, ModelConfig, classification_accuracy, expected_value_grid, \
    move_accuracy, output_grid
from .oracle import oracle_grid, random_move_baseline
from .qagent import AgentParams, QTable, greedy_accuracy, train
from .qnetwork import QNet, QNetParams, qnet_policy_accuracy, qnet_step

RECORD_HEADER = ["period", "games", "wallclock_ms", "agent", "rules",
                 "best_perf", "model_accuracy", "move_accuracy"]
HQN_HEADER = ["period", "games", "best_perf", "model_accuracy", "move_accuracy", "rules"]
CYCLE_HEADER = ["period", "games", "wallclock_ms", "rules", "best_perf", "current_perf",
                "model_accuracy", "move_accuracy", "drop", "recall"]
SWEEP_HEADER = ["dim", "model_accuracy", "move_accuracy", "random_baseline"]
RAMP = " .:-=+*#%@"


def hqn_rows(records):
    return [[r.period, r.games, r.best_perf, r.model_accuracy, r.move_accuracy, r.rules]
            for r in records]


def cycle_rows(records):
    return [[r.period, r.games, r.wallclock_ms, r.rules, r.best_perf, r.current_perf,
             r.model_accuracy, r.move_accuracy, r.drop, r.recall] for r in records]


# -- agent comparison ---------------------------------------------------------

@dataclass(frozen=True)
class ComparisonConfig:
    """One time step = one HQN period, ``q_games`` Q-agent games, ``qnet_games`` Q-Network games."""

    steps: int = 20
    rules: Rules = Rules.WYTHOFF
    hqn_games: int = 2000
    hqn_train_dims: tuple = (12, 12)
    hqn_eval_dims: tuple = (50, 50)
    q_games: int = 5000
    q_dims: tuple = (50, 50)
    qnet_games: int = 1000
    qnet_dims: tuple = (12, 12)
    qnet_encoding: str = "norm"
    qnet_replay: bool = False

    def __post_init__(self):
        if self.steps < 0 or min(self.hqn_games, self.q_games, self.qnet_games) < 0:
            raise ConfigError("steps and game budgets must be non-negative")
        dims = (self.hqn_train_dims, self.hqn_eval_dims, self.q_dims, self.qnet_dims)
        if min(min(d) for d in dims) < 2:
            raise ConfigError("board dimensions must be at least 2")


@dataclass(frozen=True)
class AgentRecord:
    period: int
    games: int
    wallclock_ms: int
    agent: str
    rules: Rules
    best_perf: float
    model_accuracy: float
    move_accuracy: float

    def row(self):
        return [getattr(self, f.name) for f in fields(self)]


def run_comparison(config: ComparisonConfig, rng) -> dict:
    """Train the three agents side by side; returns ``{agent: [AgentRecord, ...]}``.

    Each agent is scored on the board it is evaluated on: HQN's model on its
    evaluation board, the Q-agent and the Q-Network on their training boards.
    """
    rules = Rules.parse(config.rules)
    seeds = rng.integers(0, 2**63, size=3)
    rng_h, rng_q, rng_n = (np.random.default_rng(s) for s in seeds)

    hcfg = HQNConfig(rules=rules, games_per_period=config.hqn_games,
                     model=ModelConfig(train_dims=tuple(config.hqn_train_dims),
                                       eval_dims=tuple(config.hqn_eval_dims)))
    state, q_h, memory = ControllerState(), QTable(), ModelMemory(hcfg.memory_capacity)
    q = QTable()
    qparams = AgentParams()
    nparams = QNetParams(encoding=config.qnet_encoding, replay=config.qnet_replay)
    qnet = QNet.create(tuple(config.qnet_dims), rng_n, nparams)
    grid_h = oracle_grid(rules, *config.hqn_eval_dims)
    grid_q = oracle_grid(rules, *config.q_dims)
    grid_n = oracle_grid(rules, *config.qnet_dims)

    out = {"hqn": [], "q": [], "qnet": []}
    clock = {"hqn": 0.0, "q": 0.0, "qnet": 0.0}
    for step in range(config.steps):
        t = time.perf_counter()
        state, q_h, memory = learn_step(state, q_h, memory, hcfg, rng_h, rules)
        clock["hqn"] += time.perf_counter() - t
        out["hqn"].append(AgentRecord(
            step, (step + 1) * config.hqn_games, int(1000 * clock["hqn"]), "hqn", rules,
            state.best_perf, classification_accuracy(state.best_model, grid_h),
            move_accuracy(state.best_model, grid_h)))

        t = time.perf_counter()
        train(q, config.q_games, qparams, *config.q_dims, rng_q, rules)
        clock["q"] += time.perf_counter() - t
        out["q"].append(AgentRecord(step, (step + 1) * config.q_games, int(1000 * clock["q"]),
                                    "q", rules, 0.0, 0.0, greedy_accuracy(q, grid_q)))

        t = time.perf_counter()
        for _ in range(config.qnet_games):
            qnet_step(qnet, grid_n, nparams, rng_n, rules)
        clock["qnet"] += time.perf_counter() - t
        out["qnet"].append(AgentRecord(step, (step + 1) * config.qnet_games,
                                       int(1000 * clock["qnet"]), "qnet", rules, 0.0, 0.0,
                                       qnet_policy_accuracy(qnet, grid_n, rules)))
    return out


def two_proportion_test(p1: float, n1: int, p2: float, n2: int) -> float:
    """Two-sided p-value for equal success rates (pooled normal approximation)."""
    pooled = (p1 * n1 + p2 * n2) / (n1 + n2)
    se = np.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    if se == 0:
        return 1.0 if p1 == p2 else 0.0
    return float(2 * stats.norm.sf(abs(p1 - p2) / se))


def random_baseline_test(accuracy: float, grid) -> float:
    """p-value of ``accuracy`` against uniform random play, both over the grid's hot cells."""
    n = int(grid.hot.sum())
    return two_proportion_test(accuracy, n, random_move_baseline(grid), n)


# -- dimension sweep ----------------------------------------------------------

def run_dimension_sweep(model: Model, dims_list, rules=None) -> list:
    """``[dim, classification accuracy, move accuracy, random baseline]`` per square board."""
    rules = Rules.parse(rules or model.trained_on)
    rows = []
    for d in dims_list:
        if d < 2:
            raise ConfigError("board dimensions must be at least 2")
        grid = oracle_grid(rules, d, d)
        rows.append([d, classification_accuracy(model, grid), move_accuracy(model, grid),
                     random_move_baseline(grid)])
    return rows


# -- rule cycle ---------------------------------------------------------------

@dataclass(frozen=True)
class RuleCycleConfig:
    cycle: tuple = ("wythoff", "nim", "euclid", "wythoff", "nim", "euclid")
    switch_threshold: float = 0.9
    hqn: HQNConfig = field(default_factory=lambda: HQNConfig(
        periods=400, games_per_rules={"wythoff": 1000, "nim": 250, "euclid": 250}))

    def __post_init__(self):
        if not self.cycle:
            raise ConfigError("empty rule cycle")
        for g in self.cycle:
            Rules.parse(g)
        if not 0 < self.switch_threshold <= 1:
            raise ConfigError("switch_threshold must lie in (0, 1]")


def run_rule_cycle(config: RuleCycleConfig, rng):
    """Drive ``run_hqn`` through the game cycle; yields one record per period."""
    cycle = [Rules.parse(g) for g in config.cycle]
    hcfg = replace(config.hqn, rules=cycle[0])
    return run_hqn(hcfg, rng, cycle=cycle, switch_threshold=config.switch_threshold)


def switch_events(records) -> list:
    """Indices of records whose game differs from the previous record's."""
    return [i for i in range(1, len(records)) if records[i].rules != records[i - 1].rules]


# -- heatmaps -----------------------------------------------------------------

def model_heatmap(model: Model, rows: int, cols: int) -> np.ndarray:
    return output_grid(model, rows, cols)


def qtable_heatmap(q: QTable, rows: int, cols: int, rules=Rules.WYTHOFF) -> np.ndarray:
    """E[state] per cell, clipped into [0, 1] (cold cells sit near 0)."""
    return np.clip(expected_value_grid(q, rows, cols, rules), 0.0, 1.0)


def render_heatmap(values: np.ndarray) -> str:
    """One character per cell from a 10-level ramp, row 0 on top."""
    v = np.asarray(values, dtype=float)
    if not np.isfinite(v).all():
        raise ValueError("heatmap values must be finite")
    idx = np.clip((v * len(RAMP)).astype(int), 0, len(RAMP) - 1)
    return "".join("".join(RAMP[i] for i in row) + "\n" for row in idx)


def heatmap_csv_rows(values: np.ndarray):
    return [[format(float(x), ".6f") for x in row] for row in values]


def comparison_summary(out: dict, config: ComparisonConfig) -> dict:
    """Final accuracies and the Q-Network's p-value against random play."""
    final = {a: (recs[-1].move_accuracy if recs else 0.0) for a, recs in out.items()}
    grid_n = oracle_grid(config.rules, *config.qnet_dims)
    final["qnet_vs_random_p"] = random_baseline_test(final["qnet"], grid_n)
    final["random_qnet_board"] = random_move_baseline(grid_n)
    return final


def cycle_report(records, cycle_length: int = 3, window: int = 2, target: float = 0.9) -> list:
    """One dict per rule switch: which cycle it belongs to, whether a drop was
    detected within ``window`` periods, and whether memory recall restored
    perceived perf >= ``target`` within that window."""
    out = []
    for k, i in enumerate(switch_events(records), 1):
        span = records[i:i + window]
        out.append({
            "switch": k,
            "period": records[i].period,
            "to": records[i].rules.value,
            "cycle": 1 + k // cycle_length,
            "drop": any(r.drop for r in span),
            "recovered": any(r.recall and r.best_perf >= target for r in span),
        })
    return out
