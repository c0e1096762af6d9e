"""Exact hot/cold labels: retrograde solving and the closed-form rules.

Both routes are kept independent on purpose. The retrograde solver only knows
the legal-move generator; the closed forms only know arithmetic. Tests compare
them cell by cell.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

from .games import Move, Position, Rules, is_terminal, move_table, successors

MAX_CELLS = 10_000_000


class ResourceLimit(RuntimeError):
    pass


class OutOfBounds(IndexError):
    pass


@dataclass(frozen=True, eq=False)
class LabelGrid:
    """Solved board. ``cold[r, c]`` is True for cold (losing-to-move) cells."""

    rules: Rules
    rows: int
    cols: int
    cold: np.ndarray

    @property
    def hot(self) -> np.ndarray:
        return ~self.cold

    def is_cold(self, pos) -> bool:
        r, c = pos
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise OutOfBounds(f"{tuple(pos)} outside {self.rows}x{self.cols} grid")
        return bool(self.cold[r, c])

    def labels(self) -> np.ndarray:
        """Integer grid: 0 for cold, 1 for hot."""
        return (~self.cold).astype(np.int8)

    def __eq__(self, other):
        if not isinstance(other, LabelGrid):
            return NotImplemented
        return (self.rules is other.rules and self.rows == other.rows
                and self.cols == other.cols and np.array_equal(self.cold, other.cold))


def solve_retrograde(rules, rows: int, cols: int, max_cells: int = MAX_CELLS) -> LabelGrid:
    """Label every cell by backward induction over the legal-move generator.

    Cells are visited in row-major order; every successor of ``(r, c)`` has a
    smaller row or the same row and a smaller column, so it is already solved.
    """
    rules = Rules.parse(rules)
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    if rows * cols > max_cells:
        raise ResourceLimit(f"{rows}x{cols} exceeds the {max_cells}-cell cap")
    cold = np.zeros((rows, cols), dtype=bool)
    cold[0, 0] = True
    for r in range(rows):
        for c in range(cols):
            if r == 0 and c == 0:
                continue
            nr, nc = successors(rules, r, c)
            cold[r, c] = not cold[nr, nc].any()
    cold.setflags(write=False)
    return LabelGrid(rules, rows, cols, cold)


@lru_cache(maxsize=32)
def oracle_grid(rules, rows: int, cols: int) -> LabelGrid:
    """Cached exact grid. Large boards use the closed form (identical by test)."""
    rules = Rules.parse(rules)
    if rows * cols <= 150 * 150:
        return solve_retrograde(rules, rows, cols)
    return closed_form_grid(rules, rows, cols)


def solve_piles(sizes) -> np.ndarray:
    """Retrograde cold mask for k-pile Nim with pile ``i`` in ``0..sizes[i]-1``."""
    sizes = tuple(int(s) for s in sizes)
    if int(np.prod(sizes)) > MAX_CELLS:
        raise ResourceLimit(f"{sizes} exceeds the {MAX_CELLS}-state cap")
    cold = np.zeros(sizes, dtype=bool)
    # Lexicographic order: removing from any pile gives a smaller index tuple.
    for state in np.ndindex(*sizes):
        win = False
        for i, n in enumerate(state):
            for left in range(n):
                nxt = state[:i] + (left,) + state[i + 1:]
                if cold[nxt]:
                    win = True
                    break
            if win:
                break
        cold[state] = not win
    return cold


def nim_xor_cold(piles) -> bool:
    piles = list(piles)
    if not piles:
        raise ValueError("need at least one pile")
    acc = 0
    for p in piles:
        acc ^= int(p)
    return acc == 0


# -- golden-ratio arithmetic --------------------------------------------------
#
# floor(k*phi) = floor((k + sqrt(5 k^2)) / 2). For k > 0, sqrt(5 k^2) is
# irrational, so with s = isqrt(5 k^2) the value lies strictly between
# (k + s)/2 and (k + s + 1)/2, giving (k + s) // 2 exactly.

def floor_phi(k: int) -> int:
    k = int(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    return (k + isqrt(5 * k * k)) // 2


def wythoff_cold_pair(k: int):
    """k-th Wythoff cold pair (floor(k*phi), floor(k*phi^2)) and its mirror."""
    a = floor_phi(k)
    b = a + k  # floor(k*phi^2) = floor(k*phi) + k since phi^2 = phi + 1
    return Position(a, b), Position(b, a)


def euclid_cold(a: int, b: int) -> bool:
    """Cold test for Euclid under the engine's move rules.

    With ``a <= b``: ``(0, 0)`` is cold, positions on an axis are hot, and
    otherwise the position is cold iff ``a * phi > b``.
    """
    a, b = sorted((int(a), int(b)))
    if a == 0:
        return b == 0
    # phi*a > b  <=>  sqrt(5)*a > 2b - a
    d = 2 * b - a
    return d < 0 or 5 * a * a > d * d


def is_cold_closed_form(rules, pos) -> bool:
    rules = Rules.parse(rules)
    a, b = sorted((int(pos[0]), int(pos[1])))
    if rules is Rules.NIM:
        return a == b
    if rules is Rules.WYTHOFF:
        return floor_phi(b - a) == a
    return euclid_cold(a, b)


def _isqrt_array(n: np.ndarray) -> np.ndarray:
    s = np.floor(np.sqrt(n.astype(np.float64))).astype(np.int64)
    # one-step corrections make the float estimate exact for n < 2**52
    s -= (s * s > n)
    s += ((s + 1) * (s + 1) <= n)
    return s


def closed_form_grid(rules, rows: int, cols: int) -> LabelGrid:
    """Vectorised closed-form labels for a whole board."""
    rules = Rules.parse(rules)
    if rows * cols > MAX_CELLS:
        raise ResourceLimit(f"{rows}x{cols} exceeds the {MAX_CELLS}-cell cap")
    r, c = np.indices((rows, cols), dtype=np.int64)
    a, b = np.minimum(r, c), np.maximum(r, c)
    if rules is Rules.NIM:
        cold = a == b
    elif rules is Rules.WYTHOFF:
        k = b - a
        cold = (k + _isqrt_array(5 * k * k)) // 2 == a
    else:
        d = 2 * b - a
        cold = (a > 0) & ((d < 0) | (5 * a * a > d * d))
        cold[0, 0] = True
    cold = np.ascontiguousarray(cold)
    cold.setflags(write=False)
    return LabelGrid(rules, rows, cols, cold)


def perfect_move(rules, pos, grid: LabelGrid, rng: np.random.Generator) -> Move | None:
    """Move to a uniformly chosen cold successor; from a cold cell, any legal move."""
    rules = Rules.parse(rules)
    r, c = int(pos[0]), int(pos[1])
    if not (0 <= r < grid.rows and 0 <= c < grid.cols):
        raise OutOfBounds(f"{(r, c)} outside {grid.rows}x{grid.cols} grid")
    if is_terminal((r, c)):
        return None
    table = move_table(rules, r, c)
    good = np.flatnonzero(grid.cold[table.next_row, table.next_col])
    if len(good):
        return table.moves[int(good[rng.integers(len(good))])]
    return table.moves[int(rng.integers(len(table.moves)))]


def random_move_baseline(grid: LabelGrid) -> float:
    """Expected move accuracy of uniform random play: mean over hot cells of
    (cold successors / legal moves)."""
    total, n = 0.0, 0
    for r, c in itertools.product(range(grid.rows), range(grid.cols)):
        if grid.cold[r, c]:
            continue
        nr, nc = successors(grid.rules, r, c)
        total += grid.cold[nr, nc].mean()
        n += 1
    return total / n if n else 0.0
