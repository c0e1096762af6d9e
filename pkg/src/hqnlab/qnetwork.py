"""Model-free baseline: a small sigmoid network approximating the Q-function.

The network maps an encoded position to one value per action slot. Slots
enumerate every move a board of the given size can ever offer::

    [Row 1 .. Row rows-1] [Col 1 .. Col cols-1] [Diag 1 .. Diag min(rows, cols)-1]

and illegal slots are masked out when choosing. Training is online, one game
at a time, against a perfect opponent.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .games import MoveKind, Rules, move_table, random_start
from .mlp import Mlp, NumericalError, gradients
from .oracle import LabelGrid, OutOfBounds, perfect_move

ENCODINGS = ("norm", "onehot")


@dataclass(frozen=True)
class QNetParams:
    q_lr: float = 0.01
    beta: float = 0.7
    discount: float = 1.0
    net_lr: float = 0.1
    hidden: int = 15
    encoding: str = "norm"
    replay: bool = False
    replay_capacity: int = 1000
    replay_batch: int = 32


@dataclass
class QNet:
    net: Mlp
    dims: tuple
    encoding: str = "norm"
    replay_buffer: deque = field(default_factory=lambda: deque(maxlen=1000), repr=False)

    @classmethod
    def create(cls, dims, rng, params: QNetParams = QNetParams()) -> "QNet":
        if params.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}")
        rows, cols = dims
        n_in = 2 if params.encoding == "norm" else rows * cols
        net = Mlp.init(n_in, params.hidden, n_slots(dims), rng)
        return cls(net, tuple(dims), params.encoding, deque(maxlen=params.replay_capacity))

    def encode(self, pos) -> np.ndarray:
        return encode_state(pos, self.dims, self.encoding)

    def q_values(self, pos) -> np.ndarray:
        return self.net.forward(self.encode(pos)[None, :])[0]


def n_slots(dims) -> int:
    rmax, cmax = dims[0] - 1, dims[1] - 1
    return rmax + cmax + min(rmax, cmax)


def encode_state(pos, dims, encoding: str = "norm") -> np.ndarray:
    rows, cols = dims
    r, c = int(pos[0]), int(pos[1])
    if not (0 <= r < rows and 0 <= c < cols):
        raise OutOfBounds(f"{(r, c)} outside {rows}x{cols}")
    if encoding == "norm":
        return np.array([r / rows, c / cols])
    if encoding == "onehot":
        x = np.zeros(rows * cols)
        x[r * cols + c] = 1.0
        return x
    raise ValueError(f"unknown encoding {encoding!r}")


@lru_cache(maxsize=8192)
def legal_slots(rules: Rules, r: int, c: int, rows: int, cols: int) -> np.ndarray:
    """Network slot index of each legal move, aligned with ``move_table(...).moves``."""
    offset = {MoveKind.ROW: 0, MoveKind.COL: rows - 1, MoveKind.DIAG: rows + cols - 2}
    out = np.array([offset[m.kind] + m.amount - 1 for m in move_table(rules, r, c).moves],
                   dtype=np.intp)
    out.setflags(write=False)
    return out


def slot_probs(qnet: QNet, pos, beta: float, rules=Rules.WYTHOFF) -> np.ndarray:
    """Boltzmann probabilities over *all* slots; illegal slots get exactly 0."""
    rules = Rules.parse(rules)
    slots = legal_slots(rules, pos[0], pos[1], *qnet.dims)
    q = qnet.q_values(pos)
    z = beta * q[slots]
    w = np.exp(z - z.max())
    p = np.zeros(len(q))
    p[slots] = w / w.sum()
    return p


def _fit(qnet: QNet, x, target, lr):
    c, grads = gradients(qnet.net, x, target, "sse")
    for p, g in zip(qnet.net.params(), grads):
        p -= lr * g
    if not np.isfinite(c) or not all(np.isfinite(p).all() for p in qnet.net.params()):
        raise NumericalError("Q-network weights became non-finite")


def qnet_step(qnet: QNet, grid: LabelGrid, params: QNetParams, rng, rules=Rules.WYTHOFF) -> QNet:
    """Play and learn from one full game against ``perfect_move``; updates in place."""
    rules = Rules.parse(rules)
    rows, cols = qnet.dims
    s = tuple(random_start(rows, cols, rng))
    while s != (0, 0):
        x = qnet.encode(s)
        q_est = qnet.net.forward(x[None, :])[0]
        table = move_table(rules, *s)
        slots = legal_slots(rules, s[0], s[1], rows, cols)
        z = params.beta * q_est[slots]
        w = np.exp(z - z.max())
        cum = np.cumsum(w)
        i = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), len(w) - 1)
        s = (int(table.next_row[i]), int(table.next_col[i]))
        if s == (0, 0):
            reward = 1.0
        else:
            mv = perfect_move(rules, s, grid, rng)
            opp = move_table(rules, *s)
            j = opp.moves.index(mv)
            s = (int(opp.next_row[j]), int(opp.next_col[j]))
            if s == (0, 0):
                reward = -1.0
            else:
                nxt = legal_slots(rules, s[0], s[1], rows, cols)
                reward = params.discount * float(qnet.q_values(s)[nxt].max())
        target = q_est.copy()
        target[slots[i]] += params.q_lr * (reward - target[slots[i]])
        if params.replay:
            qnet.replay_buffer.append((x, target))
            k = min(params.replay_batch, len(qnet.replay_buffer))
            idx = rng.choice(len(qnet.replay_buffer), size=k, replace=False)
            xb = np.array([qnet.replay_buffer[t][0] for t in idx])
            yb = np.array([qnet.replay_buffer[t][1] for t in idx])
            _fit(qnet, xb, yb, params.net_lr)
        else:
            _fit(qnet, x[None, :], target[None, :], params.net_lr)
    return qnet


def qnet_policy_accuracy(qnet: QNet, grid: LabelGrid, rules=None) -> float:
    """Share of hot cells whose greedy legal slot lands on a cold cell
    (ties credited fractionally)."""
    rules = Rules.parse(rules or grid.rules)
    rows, cols = qnet.dims
    total, n = 0.0, 0
    for r, c in np.argwhere(grid.hot):
        r, c = int(r), int(c)
        if r >= rows or c >= cols:
            continue
        table = move_table(rules, r, c)
        q = qnet.q_values((r, c))[legal_slots(rules, r, c, rows, cols)]
        good = grid.cold[table.next_row, table.next_col]
        total += good[q == q.max()].mean()
        n += 1
    return total / n if n else 0.0
