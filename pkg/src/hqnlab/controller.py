"""Outer HQN loop: alternate Q-agent training with model building.

The controller keeps the best model found so far, watches its score for a
sudden collapse (the only signal that the rules changed), and keeps a memory
of retired models that can be recalled when an old rule set comes back.
"""
from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .games import Rules
from .modelnet import (Model, ModelConfig, build_model, classification_accuracy,
                       evaluate_model, move_accuracy)
from .oracle import oracle_grid
from .qagent import AgentParams, QTable, play_training_game

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ModelMemory:
    capacity: int = 10
    stored: deque = field(default_factory=deque)

    def add(self, model: Model, history):
        self.stored.append((model, list(history)))
        while len(self.stored) > self.capacity:
            self.stored.popleft()

    def __len__(self):
        return len(self.stored)


@dataclass
class ControllerState:
    best_model: Model | None = None
    best_perf: float = 0.0
    perf_history: list = field(default_factory=list)
    drops: int = 0
    last_drop: bool = False
    last_recall: bool = False
    candidate_perf: float = 0.0
    current_perf: float = 0.0
    adopted: bool = False  # a model was adopted or recalled since the flag was last cleared


@dataclass(frozen=True)
class HQNConfig:
    rules: Rules = Rules.WYTHOFF
    periods: int = 40
    games_per_period: int = 250
    delta: float = 0.5
    window: int = 10
    min_baseline: float = 0.5
    recall_threshold: float = 0.8
    memory_capacity: int = 10
    games_per_rules: dict | None = None  # per-game override of games_per_period
    agent: AgentParams = AgentParams()
    model: ModelConfig = ModelConfig()

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        (tr, tc), (er, ec) = self.model.train_dims, self.model.eval_dims
        if min(tr, tc, er, ec) < 2:
            raise ConfigError("board dimensions must be at least 2")
        if self.periods < 0 or self.games_per_period < 0 or self.window < 1:
            raise ConfigError("periods, games_per_period and window must be non-negative")

    def games_for(self, rules) -> int:
        if self.games_per_rules:
            return int(self.games_per_rules.get(Rules.parse(rules).value, self.games_per_period))
        return self.games_per_period

    @property
    def train_dims(self):
        return self.model.train_dims

    @property
    def eval_dims(self):
        return self.model.eval_dims


def detect_performance_drop(current: float, history, delta: float, window: int = 10,
                            min_baseline: float = 0.5) -> bool:
    """True when ``current / mean(last window of history) < delta``.

    A baseline below ``min_baseline`` never triggers: at low scores the ratio
    is dominated by Monte Carlo noise.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    recent = list(history)[-window:]
    if not recent:
        return False
    avg = float(np.mean(recent))
    if avg <= 0 or avg < min_baseline:
        return False
    return current / avg < delta


def remember_model(memory: ModelMemory, q: QTable, rules, trials: int, eval_dims, rng,
                   threshold: float = 0.8) -> Model | None:
    """Re-score every stored model under the current game; best one if it clears ``threshold``."""
    best, best_score = None, -1.0
    for model, _ in memory.stored:
        score = evaluate_model(model, q, trials, rules, eval_dims, rng)
        if score > best_score:
            best, best_score = model, score
    if best is None or best_score < threshold:
        return None
    return replace(best, perf=best_score)


def learn_step(state: ControllerState, q: QTable, memory: ModelMemory, config: HQNConfig,
               rng, rules=None):
    """One period. ``rules`` is the environment's game; the agents only see its moves.

    Returns ``(state, q, memory)``; ``q`` is a fresh table after a detected drop.
    """
    rules = Rules.parse(rules or config.rules)
    mc = config.model
    state.last_drop = state.last_recall = False
    if state.best_model is not None:
        current = evaluate_model(state.best_model, q, mc.trials, rules, mc.eval_dims, rng)
        state.current_perf = current
        if detect_performance_drop(current, state.perf_history, config.delta, config.window,
                                   config.min_baseline):
            log.info("performance drop: %.3f vs history %s", current,
                     state.perf_history[-config.window:])
            state.drops += 1
            state.last_drop = True
            memory.add(state.best_model, state.perf_history)
            recalled = remember_model(memory, q, rules, mc.trials, mc.eval_dims, rng,
                                      config.recall_threshold)
            if recalled is not None:
                state.best_model, state.best_perf = recalled, recalled.perf
                state.perf_history = [recalled.perf]
                state.last_recall = state.adopted = True
            else:
                state.best_model, state.best_perf = None, 0.0
                state.perf_history = []
            q = QTable()
        else:
            state.perf_history.append(current)
            del state.perf_history[:-config.window]
    else:
        state.current_perf = 0.0
    for _ in range(config.games_for(rules)):
        play_training_game(q, state.best_model, config.agent, *mc.train_dims, rng, rules)
    candidate = build_model(q, mc, rng, rules)
    state.candidate_perf = candidate.perf
    if candidate.net is not None and candidate.perf >= state.best_perf:
        state.best_model, state.best_perf = candidate, candidate.perf
        state.perf_history = [candidate.perf]
        state.adopted = True
    return state, q, memory


@dataclass(frozen=True)
class ExperimentRecord:
    period: int
    games: int
    best_perf: float
    model_accuracy: float
    move_accuracy: float
    rules: Rules
    wallclock_ms: int = 0
    agent: str = "hqn"
    current_perf: float = 0.0
    drop: bool = False
    recall: bool = False


def run_hqn(config: HQNConfig, rng, schedule=None, cycle=None, switch_threshold: float = 0.9,
            state: ControllerState | None = None):
    """Yield one ExperimentRecord per period.

    ``schedule`` maps a period index to the game active from that period on.
    ``cycle`` is a list of games played in order: the environment moves to the
    next one after a period in which best_perf exceeds ``switch_threshold``,
    provided the best model was adopted (or recalled) under the current game.
    Agents are never told about a switch. Pass ``state`` to inspect the
    controller (best model, history) while or after the stream runs.
    """
    if schedule and cycle:
        raise ConfigError("give either a period schedule or a game cycle, not both")
    state = ControllerState() if state is None else state
    q, memory = QTable(), ModelMemory(config.memory_capacity)
    schedule = {int(k): Rules.parse(v) for k, v in (schedule or {}).items()}
    cycle = [Rules.parse(g) for g in (cycle or [])]
    rules = cycle[0] if cycle else schedule.get(0, Rules.parse(config.rules))
    cycle_pos = 0
    games = 0
    t0 = time.perf_counter()
    for period in range(config.periods):
        if period in schedule and schedule[period] != rules:
            rules = schedule[period]
            state.adopted = False
        state, q, memory = learn_step(state, q, memory, config, rng, rules)
        games += config.games_for(rules)
        grid = oracle_grid(rules, *config.eval_dims)
        yield ExperimentRecord(
            period=period,
            games=games,
            best_perf=state.best_perf,
            model_accuracy=classification_accuracy(state.best_model, grid),
            move_accuracy=move_accuracy(state.best_model, grid),
            rules=rules,
            wallclock_ms=int(1000 * (time.perf_counter() - t0)),
            current_perf=state.current_perf,
            drop=state.last_drop,
            recall=state.last_recall,
        )
        if (cycle and cycle_pos + 1 < len(cycle) and state.adopted
                and state.best_perf > switch_threshold):
            cycle_pos += 1
            rules = cycle[cycle_pos]
            state.adopted = False
            log.info("period %d: environment switches to %s", period, rules.value)
