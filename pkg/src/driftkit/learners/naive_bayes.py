from __future__ import annotations

import math

from .base import SCALAR_COST, Learner

VARIANCE_FLOOR = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


class GaussianEstimator:
    """Welford running mean/variance."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    def log_pdf(self, x: float) -> float:
        var = max(self.variance, VARIANCE_FLOOR)
        d = x - self.mean
        return -0.5 * (_LOG_2PI + math.log(var) + d * d / var)

    def __eq__(self, other):
        return (self.n, self.mean, self.m2) == (other.n, other.mean, other.m2)

    def __deepcopy__(self, memo):
        g = GaussianEstimator()
        g.n, g.mean, g.m2 = self.n, self.mean, self.m2
        return g


class NaiveBayes(Learner):
    """Laplace-smoothed counts for nominal attributes, Gaussians for numeric ones."""

    kind = "NB"

    def reset(self):
        k = len(self.classes)
        self.class_counts = [0] * k
        self.total = 0
        # stats[c][a]: value counts (nominal) or a GaussianEstimator (numeric)
        self.stats = [
            [[0] * len(vi) if vi is not None else GaussianEstimator() for vi in self.value_index]
            for _ in range(k)
        ]

    def _learn(self, features, y):
        self.class_counts[y] += 1
        self.total += 1
        row = self.stats[y]
        for a, v in enumerate(features):
            vi = self.value_index[a]
            if vi is None:
                row[a].add(v)
            else:
                row[a][vi[v]] += 1

    def log_joint(self, features) -> list[float]:
        """Unnormalised log posterior per class (``-inf`` for unseen classes)."""
        k = len(self.classes)
        out = []
        for c in range(k):
            n_c = self.class_counts[c]
            if n_c == 0:
                out.append(-math.inf)
                continue
            lp = math.log((n_c + 1) / (self.total + k))
            row = self.stats[c]
            for a, v in enumerate(features):
                vi = self.value_index[a]
                if vi is None:
                    lp += row[a].log_pdf(v)
                else:
                    lp += math.log((row[a][vi[v]] + 1) / (n_c + len(vi)))
            out.append(lp)
        return out

    def predict_label(self, features):
        if self.total == 0:
            return self.classes[0]
        scores = self.log_joint(features)
        best = 0
        for c in range(1, len(scores)):
            if scores[c] > scores[best]:
                best = c
        return self.classes[best]

    def memory_cost(self):
        per_class = 1
        for vi in self.value_index:
            per_class += 3 if vi is None else len(vi)
        return SCALAR_COST * (1 + per_class * len(self.classes))
