"""One-hidden-layer sigmoid network trained by full-batch backpropagation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COSTS = ("cross_entropy", "sse")


class NumericalError(FloatingPointError):
    pass


def sigmoid(z):
    # tanh form is exact for large |z| and never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class Mlp:
    """Weights: ``w1`` (hidden x inputs), ``b1`` (hidden), ``w2`` (outputs x hidden), ``b2`` (outputs)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @classmethod
    def init(cls, n_in: int, n_hidden: int, n_out: int, rng, scale: float = 0.5) -> "Mlp":
        u = lambda *shape: rng.uniform(-scale, scale, size=shape)
        return cls(u(n_hidden, n_in), u(n_hidden), u(n_out, n_hidden), u(n_out))

    @classmethod
    def zeros(cls, n_in: int, n_hidden: int, n_out: int) -> "Mlp":
        return cls(np.zeros((n_hidden, n_in)), np.zeros(n_hidden),
                   np.zeros((n_out, n_hidden)), np.zeros(n_out))

    @property
    def shape(self):
        return self.w1.shape[1], self.w1.shape[0], self.w2.shape[0]

    def copy(self) -> "Mlp":
        return Mlp(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    def params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def _hidden(self, x):
        return sigmoid(x @ self.w1.T + self.b1)

    def logits(self, x) -> np.ndarray:
        return self._hidden(x) @ self.w2.T + self.b2

    def forward(self, x) -> np.ndarray:
        """Outputs for a batch ``(n, n_in)`` or a single input vector."""
        x = np.asarray(x, dtype=float)
        return sigmoid(self.logits(x))

    def __eq__(self, other):
        if not isinstance(other, Mlp):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.params(), other.params()))


def cost(net: Mlp, x, y, kind: str = "cross_entropy") -> float:
    """Mean cross-entropy over samples, or half the summed squared error."""
    x, y = np.atleast_2d(x), _targets(y)
    z = net.logits(x)
    if kind == "cross_entropy":
        # -[y ln a + (1-y) ln(1-a)] with a = sigmoid(z), written in logit form
        return float(np.sum(np.logaddexp(0.0, z) - y * z) / len(x))
    if kind == "sse":
        return float(0.5 * np.sum((sigmoid(z) - y) ** 2))
    raise ValueError(f"unknown cost {kind!r}")


def gradients(net: Mlp, x, y, kind: str = "cross_entropy"):
    """Cost and its gradient with respect to ``(w1, b1, w2, b2)``."""
    x, y = np.atleast_2d(x), _targets(y)
    h = net._hidden(x)
    z = h @ net.w2.T + net.b2
    a = sigmoid(z)
    if kind == "cross_entropy":
        c = np.sum(np.logaddexp(0.0, z) - y * z) / len(x)
        dz = (a - y) / len(x)
    elif kind == "sse":
        c = 0.5 * np.sum((a - y) ** 2)
        dz = (a - y) * a * (1.0 - a)
    else:
        raise ValueError(f"unknown cost {kind!r}")
    dw2 = dz.T @ h
    db2 = dz.sum(axis=0)
    dh = (dz @ net.w2) * h * (1.0 - h)
    dw1 = dh.T @ x
    db1 = dh.sum(axis=0)
    return float(c), [dw1, db1, dw2, db2]


def train_backprop(net: Mlp, x, y, error_limit: float, max_iterations: int,
                   learning_rate: float, kind: str = "cross_entropy",
                   optimizer: str = "gd") -> tuple[Mlp, float, int]:
    """Full-batch training until ``cost <= error_limit`` or the iteration cap.

    ``optimizer`` is ``"gd"`` (plain steepest descent) or ``"adam"`` (bias-corrected
    moment estimates, beta1=0.9, beta2=0.999). Returns ``(trained copy, final
    cost, iterations run)``.
    """
    x, y = np.atleast_2d(np.asarray(x, dtype=float)), _targets(y)
    if len(x) == 0:
        raise ValueError("empty dataset")
    if optimizer not in ("gd", "adam"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    net = net.copy()
    params = net.params()
    if optimizer == "adam":
        m1 = [np.zeros_like(p) for p in params]
        m2 = [np.zeros_like(p) for p in params]
    it = 0
    for it in range(1, max_iterations + 1):
        c, grads = gradients(net, x, y, kind)
        if not np.isfinite(c):
            raise NumericalError(f"cost became {c} at iteration {it}")
        if c <= error_limit:
            return net, c, it - 1
        if optimizer == "gd":
            for p, g in zip(params, grads):
                p -= learning_rate * g
            continue
        b1, b2 = 1.0 - 0.9 ** it, 1.0 - 0.999 ** it
        for p, g, a, v in zip(params, grads, m1, m2):
            a *= 0.9
            a += 0.1 * g
            v *= 0.999
            v += 0.001 * g * g
            p -= learning_rate * (a / b1) / (np.sqrt(v / b2) + 1e-8)
    c = cost(net, x, y, kind)
    if not np.isfinite(c) or not all(np.isfinite(p).all() for p in params):
        raise NumericalError("training produced non-finite weights")
    return net, c, it


def _targets(y):
    y = np.asarray(y, dtype=float)
    return y[:, None] if y.ndim == 1 else y
