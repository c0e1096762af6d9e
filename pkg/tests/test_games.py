import numpy as np
import pytest

from hqnlab.games import (IllegalMove, Move, MoveKind, Position, Rules, apply_move, is_legal,
                          is_terminal, legal_moves, move_of_slot, move_table, random_start,
                          slot_count, slot_of, successors)

R, C, D = MoveKind.ROW, MoveKind.COL, MoveKind.DIAG


def test_small_move_sets():
    assert legal_moves("wythoff", (1, 1)) == {Move(R, 1), Move(C, 1), Move(D, 1)}
    assert legal_moves("nim", (1, 1)) == {Move(R, 1), Move(C, 1)}
    assert legal_moves(Rules.WYTHOFF, (0, 0)) == set()


def test_euclid_moves_are_multiples_of_min():
    # (2,5): rows may drop by 2, cols by 2 or 4
    assert legal_moves("euclid", (2, 5)) == {Move(R, 2), Move(C, 2), Move(C, 4)}
    # on an axis the game falls back to Nim moves
    assert legal_moves("euclid", (0, 3)) == {Move(C, 1), Move(C, 2), Move(C, 3)}


def test_apply_move():
    assert apply_move((3, 5), Move(D, 3)) == (0, 2)
    assert apply_move((3, 5), Move(C, 5)) == (3, 0)
    assert apply_move((1, 1), Move(D, 1)) == (0, 0)
    with pytest.raises(IllegalMove):
        apply_move((1, 1), Move(D, 1), "nim")
    with pytest.raises(IllegalMove):
        apply_move((2, 5), Move(C, 3), "euclid")
    with pytest.raises(IllegalMove):
        apply_move((2, 2), Move(R, 3))


def test_terminal():
    assert is_terminal((0, 0))
    assert not is_terminal((0, 1))
    assert not is_terminal((7, 4))


@pytest.mark.parametrize("rules", list(Rules))
def test_move_counts_and_subsets(rules):
    for r in range(9):
        for c in range(9):
            moves = legal_moves(rules, (r, c))
            wyt = legal_moves("wythoff", (r, c))
            nim = {m for m in wyt if m.kind != D}
            if rules is Rules.WYTHOFF:
                assert len(moves) == r + c + min(r, c)
            elif rules is Rules.NIM:
                assert moves == nim
            elif min(r, c) >= 1:
                assert moves <= nim
            for m in moves:
                nxt = apply_move((r, c), m, rules)
                assert sum(nxt) < r + c


def test_slot_roundtrip():
    pos = (4, 7)
    assert slot_count(pos) == 4 + 7 + 4
    for s in range(slot_count(pos)):
        assert slot_of(pos, move_of_slot(pos, s)) == s
    with pytest.raises(IllegalMove):
        slot_of(pos, Move(D, 5))


def test_move_table_matches_successors():
    t = move_table(Rules.WYTHOFF, 3, 5)
    nr, nc = successors(Rules.WYTHOFF, 3, 5)
    assert np.array_equal(t.next_row, nr) and np.array_equal(t.next_col, nc)
    for m, r, c in zip(t.moves, t.next_row, t.next_col):
        assert apply_move((3, 5), m) == (r, c)
    with pytest.raises(ValueError):
        t.slots[0] = 9


def test_is_legal_edges():
    assert not is_legal("wythoff", (3, 3), Move(R, 0))
    assert is_legal("euclid", (3, 7), Move(C, 6))
    assert not is_legal("euclid", (3, 7), Move(C, 7))


def test_random_start_2x2_uniform():
    rng = np.random.default_rng(0)
    counts = {}
    for _ in range(30000):
        p = random_start(2, 2, rng)
        counts[p] = counts.get(p, 0) + 1
    assert set(counts) == {Position(0, 1), Position(1, 0), Position(1, 1)}
    for n in counts.values():
        assert abs(n / 30000 - 1 / 3) < 0.015


def test_random_start_replay_and_range():
    a = [random_start(12, 12, np.random.default_rng(7)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    with pytest.raises(ValueError):
        random_start(1, 5, np.random.default_rng(0))


def test_random_start_50x50_frequencies():
    # 10^6 draws; each cell should sit within 3 sigma of 1/2499 (plus a
    # handful of 4-sigma excursions allowed among 2499 cells)
    rng = np.random.default_rng(3)
    idx = rng.integers(1, 2500, size=10**6)
    # same draw path as random_start, vectorised
    r2 = np.random.default_rng(3)
    assert all(random_start(50, 50, r2) == Position(int(i) // 50, int(i) % 50) for i in idx[:50])
    counts = np.bincount(idx, minlength=2500)[1:]
    p = 1 / 2499
    sigma = np.sqrt(10**6 * p * (1 - p))
    z = np.abs(counts - 10**6 * p) / sigma
    assert (z > 3).sum() <= 15 and z.max() < 5
