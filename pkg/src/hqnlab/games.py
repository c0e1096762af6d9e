"""Two-dimensional impartial games: Wythoff, Nim and Euclid.

A position ``(row, col)`` counts the distance left to the goal corner along
each axis. Every move strictly reduces ``row + col``; ``(0, 0)`` is the only
terminal position and whoever moves into it wins.

Moves are indexed into a per-position *slot* layout shared by all three
rule sets (the Wythoff move set, which contains the other two)::

    [Row 1 .. Row r] [Col 1 .. Col c] [Diag 1 .. Diag min(r, c)]

Agents store values against slots, so a table trained under one rule set can
be queried under another without any knowledge of which game is active.
"""
from __future__ import annotations

import enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np


class IllegalMove(ValueError):
    pass


class TerminalState(ValueError):
    """Raised when an operation needs a move but the position is (0, 0)."""


class Rules(str, enum.Enum):
    WYTHOFF = "wythoff"
    NIM = "nim"
    EUCLID = "euclid"

    @classmethod
    def parse(cls, name: "str | Rules") -> "Rules":
        if isinstance(name, Rules):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown game {name!r}; expected one of "
                             f"{[r.value for r in cls]}") from None


class MoveKind(str, enum.Enum):
    ROW = "row"
    COL = "col"
    DIAG = "diag"


class Position(NamedTuple):
    row: int
    col: int


class Move(NamedTuple):
    kind: MoveKind
    amount: int

    def __str__(self):
        return f"{self.kind.value} {self.amount}"


def slot_count(pos) -> int:
    r, c = pos
    return r + c + min(r, c)


def slot_of(pos, mv: Move) -> int:
    """Slot index of ``mv`` at ``pos`` (no legality check beyond range)."""
    r, c = pos
    kind, k = mv
    if kind == MoveKind.ROW and 1 <= k <= r:
        return k - 1
    if kind == MoveKind.COL and 1 <= k <= c:
        return r + k - 1
    if kind == MoveKind.DIAG and 1 <= k <= min(r, c):
        return r + c + k - 1
    raise IllegalMove(f"{mv} out of range at {tuple(pos)}")


def move_of_slot(pos, slot: int) -> Move:
    r, c = pos
    if slot < r:
        return Move(MoveKind.ROW, slot + 1)
    if slot < r + c:
        return Move(MoveKind.COL, slot - r + 1)
    if slot < slot_count(pos):
        return Move(MoveKind.DIAG, slot - r - c + 1)
    raise IndexError(slot)


def _amounts(rules: Rules, r: int, c: int):
    """Legal (row, col, diag) amount arrays."""
    m = min(r, c)
    if rules is Rules.EUCLID and m >= 1:
        rows = np.arange(m, r + 1, m)
        cols = np.arange(m, c + 1, m)
    else:
        # Euclid with a zero coordinate falls back to Nim moves.
        rows = np.arange(1, r + 1)
        cols = np.arange(1, c + 1)
    diag = np.arange(1, m + 1) if rules is Rules.WYTHOFF else np.arange(0)
    return rows, cols, diag


def successors(rules: Rules, r: int, c: int):
    """Successor coordinates as two int arrays (row-moves, col-moves, diagonals)."""
    rows, cols, diag = _amounts(rules, r, c)
    nr = np.concatenate([r - rows, np.full(len(cols), r), r - diag])
    nc = np.concatenate([np.full(len(rows), c), c - cols, c - diag])
    return nr, nc


class MoveTable(NamedTuple):
    moves: tuple
    slots: np.ndarray
    next_row: np.ndarray
    next_col: np.ndarray
    wins: np.ndarray  # True where the move lands on (0, 0)


@lru_cache(maxsize=16384)
def move_table(rules: Rules, r: int, c: int) -> MoveTable:
    """Cached legal-move table for agents' inner loops. Treat as read-only."""
    rows, cols, diag = _amounts(rules, r, c)
    slots = np.concatenate([rows - 1, r + cols - 1, r + c + diag - 1]).astype(np.intp)
    moves = tuple([Move(MoveKind.ROW, int(k)) for k in rows]
                  + [Move(MoveKind.COL, int(k)) for k in cols]
                  + [Move(MoveKind.DIAG, int(k)) for k in diag])
    nr, nc = successors(rules, r, c)
    for a in (slots, nr, nc):
        a.setflags(write=False)
    wins = (nr == 0) & (nc == 0)
    wins.setflags(write=False)
    return MoveTable(moves, slots, nr, nc, wins)


def legal_moves(rules, pos) -> set:
    """The set of legal moves from ``pos``; empty exactly at (0, 0)."""
    rules = Rules.parse(rules)
    r, c = _check(pos)
    return set(move_table(rules, r, c).moves)


def is_legal(rules, pos, mv: Move) -> bool:
    rules = Rules.parse(rules)
    r, c = _check(pos)
    kind, k = mv
    if k < 1:
        return False
    m = min(r, c)
    if kind == MoveKind.DIAG:
        return rules is Rules.WYTHOFF and k <= m
    limit = r if kind == MoveKind.ROW else c
    if k > limit:
        return False
    if rules is Rules.EUCLID and m >= 1:
        return k % m == 0
    return True


def apply_move(pos, mv: Move, rules=Rules.WYTHOFF) -> Position:
    """Successor of ``pos`` after ``mv``; raises IllegalMove if not legal under ``rules``."""
    if not is_legal(rules, pos, mv):
        raise IllegalMove(f"{mv} is not legal at {tuple(pos)} under {Rules.parse(rules).value}")
    r, c = pos
    kind, k = mv
    if kind == MoveKind.ROW:
        return Position(r - k, c)
    if kind == MoveKind.COL:
        return Position(r, c - k)
    return Position(r - k, c - k)


def is_terminal(pos) -> bool:
    return pos[0] == 0 and pos[1] == 0


def random_start(rows: int, cols: int, rng: np.random.Generator) -> Position:
    """Uniform over the ``rows x cols`` board excluding (0, 0)."""
    if rows < 2 or cols < 2:
        raise ValueError("board must be at least 2x2")
    idx = int(rng.integers(1, rows * cols))
    return Position(idx // cols, idx % cols)


def _check(pos):
    r, c = int(pos[0]), int(pos[1])
    if r < 0 or c < 0:
        raise ValueError(f"invalid position {tuple(pos)}")
    return r, c
