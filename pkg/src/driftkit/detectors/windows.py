"""Two-sub-window detectors: ADWIN (exponential histogram) and SeqDrift2 (reservoir)."""

from __future__ import annotations

import math
import random

from .base import DRIFT, SCALAR_COST, STABLE, Detector, Verdict, check_bit


class ADWIN(Detector):
    """Adaptive window kept as an exponential histogram.

    Row ``i`` holds up to ``max_buckets`` bucket totals covering ``2**i`` bits
    each, oldest first.  Every ``clock`` steps all cuts between buckets are
    tested; while some cut separates two sub-windows whose means differ by at
    least ``sqrt(ln(4/delta') / 2m)`` (``m`` the harmonic mean of the two
    sizes, ``delta' = delta / width``) the oldest bucket is dropped.
    """

    kind = "ADWIN"
    op_cost = 3

    def __init__(self, delta: float = 0.002, max_buckets: int = 5, clock: int = 32,
                 min_sub_window: int = 5):
        super().__init__(delta=delta, max_buckets=max_buckets, clock=clock,
                         min_sub_window=min_sub_window)
        self.delta = delta
        self.max_buckets = max_buckets
        self.clock = clock
        self.min_sub_window = min_sub_window
        self.reset()

    def reset(self):
        self.rows = [[]]
        self.width = 0
        self.total = 0
        self.ticks = 0

    def step(self, bit: int) -> Verdict:
        bit = check_bit(bit)
        rows = self.rows
        rows[0].append(bit)
        self.width += 1
        self.total += bit
        i = 0
        while len(rows[i]) > self.max_buckets:
            merged = rows[i].pop(0) + rows[i].pop(0)
            if i + 1 == len(rows):
                rows.append([])
            rows[i + 1].append(merged)
            i += 1
        self.ticks += 1
        if self.ticks % self.clock == 0 and self.width >= 2 * self.min_sub_window:
            memory = self.memory_cost()
            if self._shrink():
                self.alarm_memory = memory
                return DRIFT
        return STABLE

    def _violated(self) -> bool:
        width, total = self.width, self.total
        log_term = math.log(4.0 * width / self.delta)
        n0 = s0 = 0
        lo = self.min_sub_window
        for i in range(len(self.rows) - 1, -1, -1):
            size = 1 << i
            for b in self.rows[i]:
                n0 += size
                s0 += b
                n1 = width - n0
                if n1 < lo:
                    return False
                if n0 < lo:
                    continue
                m = 2.0 / (1.0 / n0 + 1.0 / n1)
                if abs(s0 / n0 - (total - s0) / n1) >= math.sqrt(log_term / (2.0 * m)):
                    return True
        return False

    def _shrink(self) -> bool:
        shrunk = False
        while self.width >= 2 * self.min_sub_window and self._violated():
            top = self.rows[-1]
            self.width -= 1 << (len(self.rows) - 1)
            self.total -= top.pop(0)
            while len(self.rows) > 1 and not self.rows[-1]:
                self.rows.pop()
            shrunk = True
        return shrunk

    def __iter__(self):
        """Bucket (size, total) pairs, oldest first."""
        for i in range(len(self.rows) - 1, -1, -1):
            for b in self.rows[i]:
                yield 1 << i, b

    def memory_cost(self):
        buckets = sum(len(r) for r in self.rows)
        return 8 * SCALAR_COST + 2 * SCALAR_COST * buckets


class SeqDrift2(Detector):
    """Right repository of the newest block against a reservoir of older bits.

    At each block boundary the accuracy drop ``mean_left - mean_right`` is
    tested against a Bernstein bound built from the pooled sample variance.
    """

    kind = "SeqDrift2"
    op_cost = 2

    def __init__(self, block_size: int = 200, delta: float = 0.01,
                 reservoir_size: int = 200, seed: int = 0):
        super().__init__(block_size=block_size, delta=delta, reservoir_size=reservoir_size,
                         seed=seed)
        self.block_size = block_size
        self.delta = delta
        self.reservoir_size = reservoir_size
        self.seed = seed
        self.reset()

    def reset(self):
        self.left = []
        self.left_seen = 0
        self.right = []
        self.rng = random.Random(self.seed)

    def epsilon(self) -> float:
        n_l, n_r = len(self.left), len(self.right)
        m = n_l * n_r / (n_l + n_r)
        values_sum = sum(self.left) + sum(self.right)
        n = n_l + n_r
        mean = values_sum / n
        # bits: sum of squares equals the sum
        variance = max(values_sum / n - mean * mean, 0.0)
        log_term = math.log(4.0 / self.delta)
        a = log_term / (3.0 * m)
        return a + math.sqrt(a * a + 2.0 * variance * log_term / m)

    def _absorb(self):
        cap = self.reservoir_size
        for x in self.right:
            self.left_seen += 1
            if len(self.left) < cap:
                self.left.append(x)
            else:
                j = self.rng.randrange(self.left_seen)
                if j < cap:
                    self.left[j] = x
        self.right = []

    def step(self, bit: int) -> Verdict:
        self.right.append(check_bit(bit))
        if len(self.right) < self.block_size:
            return STABLE
        if self.left:
            drop = sum(self.left) / len(self.left) - sum(self.right) / len(self.right)
            if drop >= self.epsilon():
                self._alarm_reset()
                return DRIFT
        self._absorb()
        return STABLE

    def state(self):
        st = super().state()
        st["rng"] = st["rng"].getstate()
        return st

    def memory_cost(self):
        return 6 * SCALAR_COST + SCALAR_COST * (len(self.left) + len(self.right))
