"""The model layer: a small network that separates hot from cold positions.

A dataset is read off the Q-table (the best Q-value of each state, thresholded),
a sigmoid network is fitted to it, and the result is scored without any
oracle by playing it against a greedy player that uses the Q-table. Model
output near 1 means hot, near 0 means cold; the model's move is the one whose
successor looks coldest.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .games import Rules, TerminalState, move_table, random_start, successors
from .mlp import Mlp, NumericalError, train_backprop
from .qagent import QTable, _greedy_index


class EmptyDataset(ValueError):
    """No state passed the confidence threshold."""


class DegenerateDatasetWarning(UserWarning):
    pass


@dataclass
class HotColdDataset:
    positions: np.ndarray  # (n, 2) ints
    inputs: np.ndarray  # (n, 2) normalised
    labels: np.ndarray  # (n,) 0 cold / 1 hot

    def __len__(self):
        return len(self.labels)


@dataclass
class Model:
    net: Mlp | None
    perf: float
    trained_on: Rules
    train_dims: tuple
    eval_dims: tuple

    @property
    def scale(self) -> int:
        """Input normaliser: positions are divided by the larger training side."""
        return max(self.train_dims)

    def encode(self, rows, cols) -> np.ndarray:
        return np.column_stack([rows, cols]).astype(float) / self.scale

    def predict(self, rows, cols) -> np.ndarray:
        return self.net.forward(self.encode(rows, cols))[:, 0]

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "game": Rules.parse(self.trained_on).value,
            "train_dims": list(self.train_dims),
            "eval_dims": list(self.eval_dims),
            "normalization": self.scale,
            "layer_sizes": list(self.net.shape) if self.net is not None else None,
            "perf": self.perf,
        }
        if self.net is not None:
            # repr-based JSON floats round-trip bit-exactly
            for name, arr in zip(("w1", "b1", "w2", "b2"), self.net.params()):
                doc[name] = arr.tolist()
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Model":
        doc = json.loads(text)
        net = None
        if doc.get("layer_sizes"):
            net = Mlp(*(np.array(doc[k], dtype=float) for k in ("w1", "b1", "w2", "b2")))
            if list(net.shape) != doc["layer_sizes"]:
                raise ValueError("layer sizes do not match weight shapes")
        model = cls(net, float(doc["perf"]), Rules.parse(doc["game"]),
                    tuple(doc["train_dims"]), tuple(doc["eval_dims"]))
        if model.scale != doc["normalization"]:
            raise ValueError("normalization does not match train_dims")
        return model


def null_model(rules, train_dims, eval_dims) -> Model:
    return Model(None, 0.0, Rules.parse(rules), tuple(train_dims), tuple(eval_dims))


def expected_value(q: QTable, s, rules=Rules.WYTHOFF) -> float:
    """Best Q-value over the legal moves of ``s``."""
    if s[0] == 0 and s[1] == 0:
        raise TerminalState("terminal state has no moves")
    return float(q.legal_values(Rules.parse(rules), s).max())


def expected_value_grid(q: QTable, rows: int, cols: int, rules=Rules.WYTHOFF) -> np.ndarray:
    """E[state] for every cell; the terminal cell is reported as 0."""
    rules = Rules.parse(rules)
    out = np.zeros((rows, cols))
    for key in q.values:
        r, c = key
        if r < rows and c < cols and key != (0, 0):
            out[r, c] = expected_value(q, key, rules)
    return out


def extract_dataset(q: QTable, rows: int, cols: int, epsilon: float, sample_size: int | None, rng,
                    rules=Rules.WYTHOFF, scale: int | None = None) -> HotColdDataset:
    """Threshold E[state] into cold (<= epsilon) and hot (> 1 - epsilon) samples.

    Draws up to ``sample_size`` qualifying states without replacement
    (all of them when ``sample_size`` is None).
    """
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    ev = expected_value_grid(q, rows, cols, rules)
    keep = (ev <= epsilon) | (ev > 1 - epsilon)
    keep[0, 0] = False
    pos = np.argwhere(keep)
    if len(pos) == 0:
        raise EmptyDataset("no state passed the threshold")
    if sample_size is not None and len(pos) > sample_size:
        pos = pos[np.sort(rng.choice(len(pos), size=sample_size, replace=False))]
    labels = (ev[pos[:, 0], pos[:, 1]] > 1 - epsilon).astype(float)
    if labels.min() == labels.max():
        warnings.warn(f"single-class dataset ({int(labels[0])} only, {len(labels)} samples)",
                      DegenerateDatasetWarning, stacklevel=2)
    scale = scale or max(rows, cols)
    return HotColdDataset(pos, pos.astype(float) / scale, labels)


def model_move_index(model: Model, s, rules, rng) -> int:
    table = move_table(Rules.parse(rules), s[0], s[1])
    if not len(table.slots):
        raise TerminalState("terminal state has no moves")
    out = model.predict(table.next_row, table.next_col)
    best = np.flatnonzero(out == out.min())
    if len(best) == 1:
        return int(best[0])
    return int(best[rng.integers(len(best))])


def model_move(model: Model, s, rules, rng):
    """Move to the successor with the lowest model output (coldest)."""
    return move_table(Rules.parse(rules), s[0], s[1]).moves[model_move_index(model, s, rules, rng)]


def evaluate_model(model: Model, q: QTable, trials: int, rules, eval_dims, rng) -> float:
    """Win ratio of the model (moving first) against greedy play on ``q``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if model is None or model.net is None:
        return 0.0
    rules = Rules.parse(rules)
    rows, cols = eval_dims
    wins = 0
    for _ in range(trials):
        s = tuple(random_start(rows, cols, rng))
        while True:
            table = move_table(rules, s[0], s[1])
            i = model_move_index(model, s, rules, rng)
            s = (int(table.next_row[i]), int(table.next_col[i]))
            if s == (0, 0):
                wins += 1
                break
            table = move_table(rules, s[0], s[1])
            j = _greedy_index(q, s, table, rng)
            s = (int(table.next_row[j]), int(table.next_col[j]))
            if s == (0, 0):
                break
    return wins / trials


@dataclass(frozen=True)
class ModelConfig:
    train_dims: tuple = (12, 12)
    eval_dims: tuple = (50, 50)
    epsilon: float = 0.2
    sample_size: int | None = None  # None: every qualifying state
    hidden: int = 15
    learning_rate: float = 0.05
    optimizer: str = "adam"
    error_limit_range: tuple = (0.01, 0.1)
    iteration_range: tuple = (500, 5000)
    trials: int = 100
    init_scale: float = 0.5


def build_model(q: QTable, config: ModelConfig, rng, rules=Rules.WYTHOFF) -> Model:
    """Extract, train with a randomised budget, and score one candidate model."""
    rules = Rules.parse(rules)
    rows, cols = config.train_dims
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDatasetWarning)
            data = extract_dataset(q, rows, cols, config.epsilon, config.sample_size, rng,
                                   rules, scale=max(config.train_dims))
    except EmptyDataset:
        return null_model(rules, config.train_dims, config.eval_dims)
    error_limit = rng.uniform(*config.error_limit_range)
    max_iter = int(rng.integers(config.iteration_range[0], config.iteration_range[1] + 1))
    net = Mlp.init(2, config.hidden, 1, rng, config.init_scale)
    try:
        net, _, _ = train_backprop(net, data.inputs, data.labels, error_limit, max_iter,
                                   config.learning_rate, optimizer=config.optimizer)
    except NumericalError:
        return null_model(rules, config.train_dims, config.eval_dims)
    model = Model(net, 0.0, rules, tuple(config.train_dims), tuple(config.eval_dims))
    model.perf = evaluate_model(model, q, config.trials, rules, config.eval_dims, rng)
    return model


# -- oracle scoring -----------------------------------------------------------

def output_grid(model: Model, rows: int, cols: int) -> np.ndarray:
    r, c = np.indices((rows, cols))
    return model.predict(r.ravel(), c.ravel()).reshape(rows, cols)


def classification_accuracy(model: Model, grid) -> float:
    """Share of non-terminal cells where ``output >= 0.5`` agrees with hot."""
    if model is None or model.net is None:
        return 0.0
    out = output_grid(model, grid.rows, grid.cols)
    agree = (out >= 0.5) == grid.hot
    agree[0, 0] = False
    return float(agree.sum() / (grid.rows * grid.cols - 1))


def move_accuracy(model: Model, grid) -> float:
    """Share of hot cells where the model's coldest successor is truly cold
    (ties credited fractionally)."""
    if model is None or model.net is None:
        return 0.0
    return policy_accuracy(output_grid(model, grid.rows, grid.cols), grid)


def policy_accuracy(scores: np.ndarray, grid) -> float:
    """Move accuracy of the policy 'go to the successor with the lowest score'."""
    total, n = 0.0, 0
    for r, c in np.argwhere(grid.hot):
        nr, nc = successors(grid.rules, int(r), int(c))
        s = scores[nr, nc]
        total += grid.cold[nr, nc][s == s.min()].mean()
        n += 1
    return total / n if n else 0.0
