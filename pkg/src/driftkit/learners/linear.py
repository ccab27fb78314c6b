from __future__ import annotations

import math

from .base import SCALAR_COST, Learner


class OnlineScaler:
    """Running min/max per numeric attribute; nominal attributes become one-hot blocks."""

    def __init__(self, value_index):
        self.value_index = value_index
        self.lo = [math.inf] * len(value_index)
        self.hi = [-math.inf] * len(value_index)
        self.width = sum(1 if vi is None else len(vi) for vi in value_index)

    def observe(self, features) -> None:
        for a, v in enumerate(features):
            if self.value_index[a] is None:
                if v < self.lo[a]:
                    self.lo[a] = v
                if v > self.hi[a]:
                    self.hi[a] = v

    def encode(self, features) -> list[float]:
        out = []
        for a, v in enumerate(features):
            vi = self.value_index[a]
            if vi is None:
                lo, hi = self.lo[a], self.hi[a]
                if hi > lo:
                    out.append(min(1.0, max(0.0, (v - lo) / (hi - lo))))
                else:
                    out.append(0.0)
            else:
                block = [0.0] * len(vi)
                block[vi[v]] = 1.0
                out.extend(block)
        return out

    def __eq__(self, other):
        return isinstance(other, OnlineScaler) and vars(self) == vars(other)


class Perceptron(Learner):
    """One-vs-rest hard-threshold units with a bias input.

    Each unit outputs 1 when ``w.x + b > 0``.  The update is the classic
    ``w += rate * (target - output) * x``; prediction takes the class whose
    unit has the largest activation, ties going to class order.
    """

    kind = "Perceptron"

    def __init__(self, schema, learning_rate: float = 1.0):
        self.learning_rate = learning_rate
        super().__init__(schema, learning_rate=learning_rate)

    def reset(self):
        self.scaler = OnlineScaler(self.value_index)
        d = self.scaler.width + 1  # trailing bias input
        self.weights = [[0.0] * d for _ in self.classes]

    def _inputs(self, features):
        x = self.scaler.encode(features)
        x.append(1.0)
        return x

    @staticmethod
    def _dot(w, x):
        return sum(wi * xi for wi, xi in zip(w, x))

    def activations(self, features) -> list[float]:
        x = self._inputs(features)
        return [self._dot(w, x) for w in self.weights]

    def predict_label(self, features):
        acts = self.activations(features)
        best = 0
        for c in range(1, len(acts)):
            if acts[c] > acts[best]:
                best = c
        return self.classes[best]

    def _learn(self, features, y):
        self.scaler.observe(features)
        x = self._inputs(features)
        rate = self.learning_rate
        for c, w in enumerate(self.weights):
            output = 1 if self._dot(w, x) > 0 else 0
            err = (1 if c == y else 0) - output
            if err:
                step = rate * err
                for i, xi in enumerate(x):
                    w[i] += step * xi

    def memory_cost(self):
        return SCALAR_COST * (len(self.classes) * (self.scaler.width + 1) + 2 * len(self.value_index))
