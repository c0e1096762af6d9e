"""Tabular Q-learning with Boltzmann exploration and an optional model tip.

The learner plays against a greedy copy of itself that reads the same table.
The rule set is an environment argument only: it decides which moves exist,
and nothing in the table records it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .games import (IllegalMove, Move, MoveKind, Position, Rules, TerminalState,
                    is_legal, move_of_slot, move_table, random_start, slot_count,
                    slot_of)


@dataclass(frozen=True)
class AgentParams:
    alpha: float = 0.1
    discount: float = 1.0
    beta: float = 0.7
    conf_limit: float = 0.25
    steepness: float = 7.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0 <= self.conf_limit <= 1:
            raise ValueError("conf_limit must lie in [0, 1]")
        if self.steepness <= 0:
            raise ValueError("steepness must be positive")


class QTable:
    """Sparse Q-values: one slot array per visited position, default 0."""

    def __init__(self):
        self.values: dict[tuple, np.ndarray] = {}

    def __len__(self):
        return len(self.values)

    def row(self, pos) -> np.ndarray | None:
        return self.values.get((pos[0], pos[1]))

    def _row_for_write(self, pos) -> np.ndarray:
        key = (pos[0], pos[1])
        arr = self.values.get(key)
        if arr is None:
            arr = self.values[key] = np.zeros(slot_count(key))
        return arr

    def get(self, pos, mv: Move) -> float:
        arr = self.row(pos)
        return 0.0 if arr is None else float(arr[slot_of(pos, mv)])

    def set(self, pos, mv: Move, value: float):
        self._row_for_write(pos)[slot_of(pos, mv)] = value

    def legal_values(self, rules: Rules, pos) -> np.ndarray:
        table = move_table(rules, pos[0], pos[1])
        arr = self.row(pos)
        if arr is None:
            return np.zeros(len(table.slots))
        return arr[table.slots]

    def copy(self) -> "QTable":
        out = QTable()
        out.values = {k: v.copy() for k, v in self.values.items()}
        return out

    def entries(self):
        """Yield ``(row, col, move, value)`` for every non-zero entry, sorted."""
        for key in sorted(self.values):
            arr = self.values[key]
            for s in np.flatnonzero(arr):
                yield key[0], key[1], move_of_slot(key, int(s)), float(arr[s])

    def __eq__(self, other):
        if not isinstance(other, QTable):
            return NotImplemented
        a = {k: v for k, v in self.values.items() if v.any()}
        b = {k: v for k, v in other.values.items() if v.any()}
        return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)

    # -- persistence ---------------------------------------------------------

    HEADER = ["row", "col", "move_kind", "move_amount", "q_value"]

    def to_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.HEADER)
        for r, c, mv, v in self.entries():
            w.writerow([r, c, mv.kind.value, mv.amount, format(v, ".17g")])

    @classmethod
    def from_csv(cls, fh) -> "QTable":
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows)
        if header != cls.HEADER:
            raise ValueError(f"unexpected Q-table header {header}")
        q = cls()
        for r, c, kind, amount, value in rows:
            q.set((int(r), int(c)), Move(MoveKind(kind), int(amount)), float(value))
        return q


def _next_max(q: QTable, rules: Rules, s_next) -> float:
    if s_next[0] == 0 and s_next[1] == 0:
        return 0.0
    arr = q.row(s_next)
    if arr is None:
        return 0.0
    return float(arr[move_table(rules, s_next[0], s_next[1]).slots].max())


def q_update(q: QTable, s, a: Move, reward: float, s_next, params: AgentParams,
             rules=Rules.WYTHOFF) -> float:
    """One Q-learning backup in place. Returns the temporal-difference error."""
    rules = Rules.parse(rules)
    if not is_legal(rules, s, a):
        raise IllegalMove(f"{a} is not legal at {tuple(s)}")
    return _backup(q, rules, (s[0], s[1]), slot_of(s, a), reward, s_next, params)


def _backup(q, rules, s, slot, reward, s_next, params) -> float:
    arr = q._row_for_write(s)
    td = reward + params.discount * _next_max(q, rules, s_next) - arr[slot]
    arr[slot] += params.alpha * td
    return float(td)


def boltzmann_probs(q: QTable, s, beta: float, rules=Rules.WYTHOFF):
    """Softmax over legal moves: returns ``(moves, probabilities)``."""
    rules = Rules.parse(rules)
    if s[0] == 0 and s[1] == 0:
        raise TerminalState("no moves from the terminal position")
    table = move_table(rules, s[0], s[1])
    z = beta * q.legal_values(rules, s)
    w = np.exp(z - z.max())
    return table.moves, w / w.sum()


def model_confidence(perf: float, params: AgentParams) -> float:
    """Probability of following the model's move, in ``[0, conf_limit]``."""
    return max(0.0, params.conf_limit - math.exp(-params.steepness * perf))


def _sample_boltzmann(qs: np.ndarray, beta: float, rng) -> int:
    w = np.exp(beta * (qs - qs.max()))
    cum = np.cumsum(w)
    return min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), len(qs) - 1)


def _argmax_random(values: np.ndarray, rng) -> int:
    best = np.flatnonzero(values == values.max())
    if len(best) == 1:
        return int(best[0])
    return int(best[rng.integers(len(best))])


def select_action(q: QTable, s, model, params: AgentParams, rng, rules=Rules.WYTHOFF) -> Move:
    """Follow the model with probability ``model_confidence``, else sample Boltzmann."""
    rules = Rules.parse(rules)
    if s[0] == 0 and s[1] == 0:
        raise TerminalState("no moves from the terminal position")
    table = move_table(rules, s[0], s[1])
    return table.moves[_select_index(q, s, table, model, params, rng, rules)]


def _select_index(q, s, table, model, params, rng, rules) -> int:
    if model is not None and model.net is not None:
        gate = model_confidence(model.perf, params)
        if gate > 0 and rng.random() < gate:
            from .modelnet import model_move_index
            return model_move_index(model, s, rules, rng)
    arr = q.row(s)
    if arr is None:
        return int(rng.integers(len(table.slots)))
    return _sample_boltzmann(arr[table.slots], params.beta, rng)


def greedy_move(q: QTable, s, rng, rules=Rules.WYTHOFF) -> Move:
    """Highest-valued legal move, ties broken uniformly at random."""
    rules = Rules.parse(rules)
    if s[0] == 0 and s[1] == 0:
        raise TerminalState("no moves from the terminal position")
    table = move_table(rules, s[0], s[1])
    return table.moves[_greedy_index(q, s, table, rng)]


def _greedy_index(q, s, table, rng) -> int:
    arr = q.row(s)
    if arr is None:
        return int(rng.integers(len(table.slots)))
    return _argmax_random(arr[table.slots], rng)


def play_training_game(q: QTable, model, params: AgentParams, rows: int, cols: int, rng,
                       rules=Rules.WYTHOFF) -> float:
    """Play one self-play game from a random start, updating ``q`` in place.

    Returns the mean squared TD error over the learner's moves.
    """
    rules = Rules.parse(rules)
    s = random_start(rows, cols, rng)
    s = (s.row, s.col)
    sq, n = 0.0, 0
    while s != (0, 0):
        table = move_table(rules, s[0], s[1])
        i = _select_index(q, s, table, model, params, rng, rules)
        nxt = (int(table.next_row[i]), int(table.next_col[i]))
        if nxt == (0, 0):
            reward = 1.0
        else:
            opp = move_table(rules, nxt[0], nxt[1])
            j = _greedy_index(q, nxt, opp, rng)
            nxt = (int(opp.next_row[j]), int(opp.next_col[j]))
            reward = -1.0 if nxt == (0, 0) else 0.0
        td = _backup(q, rules, s, int(table.slots[i]), reward, nxt, params)
        sq += td * td
        n += 1
        s = nxt
    return sq / n if n else 0.0


def train(q: QTable, games: int, params: AgentParams, rows: int, cols: int, rng,
          rules=Rules.WYTHOFF, model=None) -> QTable:
    for _ in range(games):
        play_training_game(q, model, params, rows, cols, rng, rules)
    return q


def greedy_accuracy(q: QTable, grid) -> float:
    """Fraction of oracle-hot cells whose greedy move lands on a cold cell.

    Ties count fractionally (the chance a uniform tie-break picks a cold move).
    """
    total, n = 0.0, 0
    rules = grid.rules
    for r in range(grid.rows):
        for c in range(grid.cols):
            if grid.cold[r, c]:
                continue
            table = move_table(rules, r, c)
            good = grid.cold[table.next_row, table.next_col]
            arr = q.row((r, c))
            if arr is None:
                total += good.mean()
            else:
                qs = arr[table.slots]
                total += good[qs == qs.max()].mean()
            n += 1
    return total / n if n else 0.0
