"""VFDT-style Hoeffding tree and its depth-one variant, the decision stump."""

from __future__ import annotations

import math

from .base import SCALAR_COST, Learner, majority

N_SPLIT_POINTS = 10


def hoeffding_bound(value_range: float, confidence: float, n: float) -> float:
    return math.sqrt(value_range * value_range * math.log(1.0 / confidence) / (2.0 * n))


def entropy(counts) -> float:
    total = sum(counts)
    if total <= 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def info_gain(pre, post) -> float:
    """Entropy reduction from splitting class counts ``pre`` into branches ``post``."""
    total = sum(sum(b) for b in post)
    if total <= 0:
        return 0.0
    # at least two non-empty branches, else the split separates nothing
    if sum(1 for b in post if sum(b) > 0) < 2:
        return 0.0
    return entropy(pre) - sum(sum(b) / total * entropy(b) for b in post)


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


class NumericObserver:
    """Per-class Gaussian summary of one numeric attribute at a leaf."""

    __slots__ = ("n", "mean", "m2", "lo", "hi")

    def __init__(self, k: int):
        self.n = [0] * k
        self.mean = [0.0] * k
        self.m2 = [0.0] * k
        self.lo = [math.inf] * k
        self.hi = [-math.inf] * k

    def add(self, x: float, y: int) -> None:
        self.n[y] += 1
        d = x - self.mean[y]
        self.mean[y] += d / self.n[y]
        self.m2[y] += d * (x - self.mean[y])
        if x < self.lo[y]:
            self.lo[y] = x
        if x > self.hi[y]:
            self.hi[y] = x

    def split_counts(self, threshold: float):
        """Estimated class counts on each side of ``x <= threshold``."""
        left, right = [], []
        for c in range(len(self.n)):
            n = self.n[c]
            if n == 0:
                w = 0.0
            elif threshold < self.lo[c]:
                w = 0.0
            elif threshold >= self.hi[c]:
                w = float(n)
            else:
                sd = math.sqrt(self.m2[c] / (n - 1)) if n > 1 else 0.0
                w = n * _normal_cdf((threshold - self.mean[c]) / sd) if sd > 0 else float(n)
            left.append(w)
            right.append(n - w)
        return left, right

    def best_split(self, pre):
        lo = min(self.lo)
        hi = max(self.hi)
        best = (0.0, None)
        if not lo < hi:
            return best
        step = (hi - lo) / (N_SPLIT_POINTS + 1)
        for i in range(1, N_SPLIT_POINTS + 1):
            threshold = lo + step * i
            gain = info_gain(pre, self.split_counts(threshold))
            if gain > best[0]:
                best = (gain, threshold)
        return best

    def __eq__(self, other):
        return all(getattr(self, s) == getattr(other, s) for s in self.__slots__)

    def __deepcopy__(self, memo):
        o = NumericObserver(0)
        for s in self.__slots__:
            setattr(o, s, list(getattr(self, s)))
        return o


class Leaf:
    def __init__(self, k: int, value_index, counts=None, fallback: int = 0):
        self.counts = list(counts) if counts is not None else [0] * k
        self.fallback = fallback
        self.seen_at_last_eval = sum(self.counts)
        self.observers = [
            NumericObserver(k) if vi is None else [[0] * k for _ in vi] for vi in value_index
        ]

    def __eq__(self, other):
        return isinstance(other, Leaf) and vars(self) == vars(other)

    @property
    def weight(self):
        return sum(self.counts)

    def predict(self) -> int:
        return majority(self.counts) if any(self.counts) else self.fallback


class Split:
    def __init__(self, attribute: int, children, threshold: float | None = None):
        self.attribute = attribute
        self.threshold = threshold  # None for a multiway nominal split
        self.children = children

    def __eq__(self, other):
        return isinstance(other, Split) and vars(self) == vars(other)

    def branch(self, features, value_index):
        v = features[self.attribute]
        if self.threshold is None:
            return self.children[value_index[self.attribute][v]]
        return self.children[0 if v <= self.threshold else 1]


class HoeffdingTree(Learner):
    """Majority-class leaves, information gain, Hoeffding-bound split gating."""

    kind = "HT"
    op_cost = 2

    def __init__(self, schema, grace_period: int = 200, split_confidence: float = 1e-7,
                 tie_threshold: float = 0.05, max_depth: int | None = None):
        self.grace_period = grace_period
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        self.max_depth = max_depth
        params = dict(grace_period=grace_period, split_confidence=split_confidence,
                      tie_threshold=tie_threshold)
        if max_depth is not None and type(self) is HoeffdingTree:
            params["max_depth"] = max_depth
        super().__init__(schema, **params)

    def reset(self):
        self.root = Leaf(len(self.classes), self.value_index)
        self.n_splits = 0
        self.n_leaves = 1

    def _sort(self, features):
        node, depth = self.root, 0
        while isinstance(node, Split):
            node = node.branch(features, self.value_index)
            depth += 1
        return node, depth

    def predict_label(self, features):
        leaf, _ = self._sort(features)
        return self.classes[leaf.predict()]

    def _learn(self, features, y):
        leaf, depth = self._sort(features)
        leaf.counts[y] += 1
        if self.max_depth is not None and depth >= self.max_depth:
            return
        for a, v in enumerate(features):
            vi = self.value_index[a]
            if vi is None:
                leaf.observers[a].add(v, y)
            else:
                leaf.observers[a][vi[v]][y] += 1
        weight = leaf.weight
        if weight - leaf.seen_at_last_eval >= self.grace_period:
            leaf.seen_at_last_eval = weight
            self._attempt_split(leaf, features)

    def candidate_splits(self, leaf):
        """``(gain, attribute, threshold)`` per attribute, best first."""
        pre = leaf.counts
        out = []
        for a, obs in enumerate(leaf.observers):
            if self.value_index[a] is None:
                gain, threshold = obs.best_split(pre)
                if threshold is not None:
                    out.append((gain, a, threshold))
            else:
                out.append((info_gain(pre, obs), a, None))
        out.sort(key=lambda s: (-s[0], s[1]))
        return out

    def split_decision(self, leaf):
        """Return the winning candidate, or ``None`` when the bound holds the split back."""
        if sum(1 for c in leaf.counts if c > 0) < 2:
            return None
        candidates = self.candidate_splits(leaf)
        if not candidates:
            return None
        best = candidates[0]
        second_gain = candidates[1][0] if len(candidates) > 1 else 0.0
        eps = hoeffding_bound(math.log2(len(self.classes)), self.split_confidence, leaf.weight)
        if best[0] > 0 and (best[0] - second_gain > eps or eps < self.tie_threshold):
            return best
        return None

    def _attempt_split(self, leaf, features):
        decision = self.split_decision(leaf)
        if decision is None:
            return
        _, a, threshold = decision
        k = len(self.classes)
        fallback = leaf.predict()
        obs = leaf.observers[a]
        if threshold is None:
            children = [Leaf(k, self.value_index, counts, fallback) for counts in obs]
        else:
            left, right = obs.split_counts(threshold)
            children = [Leaf(k, self.value_index, left, fallback),
                        Leaf(k, self.value_index, right, fallback)]
        self._replace(leaf, Split(a, children, threshold))
        self.n_splits += 1
        self.n_leaves += len(children) - 1

    def _replace(self, leaf, split):
        if self.root is leaf:
            self.root = split
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            for i, child in enumerate(node.children):
                if child is leaf:
                    node.children[i] = split
                    return
                if isinstance(child, Split):
                    stack.append(child)

    def memory_cost(self):
        k = len(self.classes)
        per_leaf = k + 2
        for vi in self.value_index:
            per_leaf += 5 * k if vi is None else k * len(vi)
        return SCALAR_COST * (per_leaf * self.n_leaves + 2 * self.n_splits + 4)


class DecisionStump(HoeffdingTree):
    """A Hoeffding tree limited to one split."""

    kind = "DS"
    op_cost = 1

    def __init__(self, schema, grace_period: int = 200, split_confidence: float = 1e-7,
                 tie_threshold: float = 0.05):
        super().__init__(schema, grace_period, split_confidence, tie_threshold, max_depth=1)
