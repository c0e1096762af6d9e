"""Hand-built models used across tests."""
import numpy as np

from hqnlab.games import Rules
from hqnlab.mlp import Mlp
from hqnlab.modelnet import Model
from hqnlab.oracle import closed_form_grid


class OracleModel(Model):
    """Outputs exactly 1 on hot cells and 0 on cold cells (any board size)."""

    def predict(self, rows, cols):
        rows, cols = np.asarray(rows), np.asarray(cols)
        g = closed_form_grid(self.trained_on, int(rows.max()) + 1, int(cols.max()) + 1)
        return g.hot[rows, cols].astype(float)


class ConstantModel(Model):
    def predict(self, rows, cols):
        return np.full(len(np.atleast_1d(rows)), 0.5)


def oracle_model(rules="wythoff", perf=1.0, train_dims=(12, 12), eval_dims=(50, 50)):
    return OracleModel(Mlp.zeros(2, 1, 1), perf, Rules.parse(rules), train_dims, eval_dims)


def constant_model(rules="wythoff", perf=0.5, train_dims=(12, 12), eval_dims=(50, 50)):
    return ConstantModel(Mlp.zeros(2, 1, 1), perf, Rules.parse(rules), train_dims, eval_dims)


class AntiOracleModel(OracleModel):
    """Prefers hot successors: the worst possible policy."""

    def predict(self, rows, cols):
        return 1.0 - super().predict(rows, cols)


def anti_oracle_model(rules="wythoff", perf=1.0, train_dims=(12, 12), eval_dims=(50, 50)):
    return AntiOracleModel(Mlp.zeros(2, 1, 1), perf, Rules.parse(rules), train_dims, eval_dims)
