from __future__ import annotations

import numpy as np

from .base import SCALAR_COST, Learner


class KNN(Learner):
    """k nearest neighbours over a sliding buffer of the last ``window`` instances.

    Numeric attributes are min-max scaled by the buffer's running extremes
    (extremes only grow until reset); nominal attributes contribute a 0/1
    mismatch.  Distance ties favour older instances; vote ties favour class
    order.
    """

    kind = "KNN"
    op_cost = 3

    def __init__(self, schema, k: int = 5, window: int = 1000):
        if k < 1 or window < 1:
            raise ValueError("k and window must be positive")
        self.k = k
        self.window = window
        super().__init__(schema, k=k, window=window)

    def reset(self):
        arity = len(self.value_index)
        self.numeric_cols = [a for a, vi in enumerate(self.value_index) if vi is None]
        self.nominal_cols = [a for a, vi in enumerate(self.value_index) if vi is not None]
        self.X = np.zeros((self.window, arity))
        self.y = np.zeros(self.window, dtype=np.int64)
        self.order = np.zeros(self.window, dtype=np.int64)  # insertion stamp
        self.size = 0
        self.head = 0
        self.stamp = 0
        self.lo = np.full(arity, np.inf)
        self.hi = np.full(arity, -np.inf)

    def encode(self, features) -> np.ndarray:
        return np.array([
            v if vi is None else vi[v] for v, vi in zip(features, self.value_index)
        ], dtype=float)

    def distances(self, features) -> np.ndarray:
        """Squared distance from ``features`` to every buffered instance (buffer order)."""
        q = self.encode(features)
        X = self.X[:self.size]
        d = np.zeros(self.size)
        if self.numeric_cols:
            c = self.numeric_cols
            span = self.hi[c] - self.lo[c]
            span = np.where(span > 0, span, 1.0)
            diff = (X[:, c] - q[c]) / span
            d += (diff * diff).sum(axis=1)
        if self.nominal_cols:
            c = self.nominal_cols
            d += (X[:, c] != q[c]).sum(axis=1)
        return d

    def neighbours(self, features) -> np.ndarray:
        """Buffer slots of the k nearest instances, nearest first, oldest first on ties."""
        d = self.distances(features)
        order = np.lexsort((self.order[:self.size], d))
        return order[:self.k]

    def predict_label(self, features):
        if self.size == 0:
            return self.classes[0]
        votes = np.bincount(self.y[self.neighbours(features)], minlength=len(self.classes))
        return self.classes[int(np.argmax(votes))]

    def _learn(self, features, y):
        x = self.encode(features)
        if self.numeric_cols:
            c = self.numeric_cols
            self.lo[c] = np.minimum(self.lo[c], x[c])
            self.hi[c] = np.maximum(self.hi[c], x[c])
        self.X[self.head] = x
        self.y[self.head] = y
        self.order[self.head] = self.stamp
        self.stamp += 1
        self.head = (self.head + 1) % self.window
        self.size = min(self.size + 1, self.window)

    def model_state(self):
        state = super().model_state()
        for key in ("X", "y", "order", "lo", "hi"):
            state[key] = state[key].tolist()
        return state

    def memory_cost(self):
        arity = len(self.value_index)
        return SCALAR_COST * (arity + 1) * self.size + SCALAR_COST * (2 * arity + 4)
