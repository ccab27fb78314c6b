"""Hoeffding-bound sliding-window detectors: FHDDM, FHDDMS and FHDDMS_add."""

from __future__ import annotations

import math
from collections import deque

from .base import DRIFT, SCALAR_COST, STABLE, Detector, Verdict, check_bit


def fhddm_epsilon(n: int, delta: float) -> float:
    """Detection threshold ``sqrt(ln(1/delta) / (2n))`` for a window of ``n`` bits."""
    if n < 1:
        raise ValueError(f"window size must be >= 1, got {n}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return math.sqrt(math.log(1.0 / delta) / (2.0 * n))


class BitWindow:
    """Fixed-capacity FIFO of bits with a running sum (ring buffer)."""

    __slots__ = ("capacity", "_bits", "_head", "size", "total")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.clear()

    def clear(self) -> None:
        self._bits = [0] * self.capacity
        self._head = 0  # slot the next bit goes into
        self.size = 0
        self.total = 0

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def push(self, bit: int) -> int | None:
        """Insert ``bit``; return the evicted bit when the window was full."""
        evicted = None
        if self.size == self.capacity:
            evicted = self._bits[self._head]
            self.total -= evicted
        else:
            self.size += 1
        self._bits[self._head] = bit
        self.total += bit
        self._head = (self._head + 1) % self.capacity
        return evicted

    def recent(self, back: int) -> int:
        """Bit ``back`` positions behind the newest one (0 = newest)."""
        if not 0 <= back < self.size:
            raise IndexError(back)
        return self._bits[(self._head - 1 - back) % self.capacity]

    def __len__(self):
        return self.size

    def __iter__(self):
        start = (self._head - self.size) % self.capacity
        for i in range(self.size):
            yield self._bits[(start + i) % self.capacity]

    def __eq__(self, other):
        return (isinstance(other, BitWindow) and self.capacity == other.capacity
                and list(self) == list(other))

    def __deepcopy__(self, memo):
        clone = BitWindow(self.capacity)
        for b in self:
            clone.push(b)
        return clone


class FHDDM(Detector):
    """Alarms when the window accuracy falls ``epsilon`` below its running maximum."""

    kind = "FHDDM"

    def __init__(self, n: int = 100, delta: float = 1e-7):
        super().__init__(n=n, delta=delta)
        self.n = n
        self.delta = delta
        self.epsilon = fhddm_epsilon(n, delta)
        self.window = BitWindow(n)
        self.reset()

    def reset(self):
        self.window.clear()
        self.mu_t = None
        self.mu_max = 0.0

    def step(self, bit: int) -> Verdict:
        check_bit(bit)
        w = self.window
        w.push(bit)
        if w.size < self.n:
            return STABLE
        mu = w.total / self.n
        self.mu_t = mu
        if mu > self.mu_max:
            self.mu_max = mu
        if self.mu_max - mu >= self.epsilon:
            self._alarm_reset()
            return DRIFT
        return STABLE

    def memory_cost(self):
        # n, delta, epsilon, running sum, mu_t, mu_max + stored bits
        return 6 * SCALAR_COST + self.window.size


class FHDDMS(Detector):
    """Stacked short and long windows over one bit buffer.

    The short test runs once ``n_short`` bits are present; the long test once
    the buffer holds ``n_long`` bits.
    """

    kind = "FHDDMS"

    def __init__(self, n_long: int = 100, n_short: int = 25, delta: float = 1e-7):
        if not 1 <= n_short < n_long:
            raise ValueError("need 1 <= n_short < n_long")
        super().__init__(n_long=n_long, n_short=n_short, delta=delta)
        self.n_long = n_long
        self.n_short = n_short
        self.delta = delta
        self.epsilon_long = fhddm_epsilon(n_long, delta)
        self.epsilon_short = fhddm_epsilon(n_short, delta)
        self.window = BitWindow(n_long)
        self.reset()

    def reset(self):
        self.window.clear()
        self.short_total = 0
        self.mu_long = None
        self.mu_short = None
        self.mu_max_long = 0.0
        self.mu_max_short = 0.0

    def step(self, bit: int) -> Verdict:
        check_bit(bit)
        w = self.window
        ns = self.n_short
        if w.size >= ns:
            self.short_total += bit - w.recent(ns - 1)
        else:
            self.short_total += bit
        w.push(bit)

        alarm = False
        if w.size >= ns:
            mu_s = self.short_total / ns
            self.mu_short = mu_s
            if mu_s > self.mu_max_short:
                self.mu_max_short = mu_s
            if self.mu_max_short - mu_s >= self.epsilon_short:
                alarm = True
        if w.size == self.n_long:
            mu_l = w.total / self.n_long
            self.mu_long = mu_l
            if mu_l > self.mu_max_long:
                self.mu_max_long = mu_l
            if self.mu_max_long - mu_l >= self.epsilon_long:
                alarm = True
        if alarm:
            self._alarm_reset()
            return DRIFT
        return STABLE

    def memory_cost(self):
        # n_l, n_s, delta, eps_l, eps_s, long sum, short sum, 2 means, 2 maxima
        return 11 * SCALAR_COST + self.window.size


class FHDDMSAdd(Detector):
    """FHDDMS over block sums of ``n_short`` bits; tests only at block boundaries."""

    kind = "FHDDMS_add"

    def __init__(self, n_long: int = 100, n_short: int = 25, delta: float = 1e-7):
        if not 1 <= n_short < n_long or n_long % n_short:
            raise ValueError("need n_short < n_long with n_short dividing n_long")
        super().__init__(n_long=n_long, n_short=n_short, delta=delta)
        self.n_long = n_long
        self.n_short = n_short
        self.delta = delta
        self.n_blocks = n_long // n_short
        self.epsilon_long = fhddm_epsilon(n_long, delta)
        self.epsilon_short = fhddm_epsilon(n_short, delta)
        self.reset()

    def reset(self):
        self.block_sums = deque()
        self.blocks_total = 0
        self.current_sum = 0
        self.current_count = 0
        self.mu_long = None
        self.mu_short = None
        self.mu_max_long = 0.0
        self.mu_max_short = 0.0

    def step(self, bit: int) -> Verdict:
        check_bit(bit)
        self.current_sum += bit
        self.current_count += 1
        if self.current_count < self.n_short:
            return STABLE

        block = self.current_sum
        self.current_sum = 0
        self.current_count = 0
        self.block_sums.append(block)
        self.blocks_total += block
        if len(self.block_sums) > self.n_blocks:
            self.blocks_total -= self.block_sums.popleft()

        alarm = False
        mu_s = block / self.n_short
        self.mu_short = mu_s
        if mu_s > self.mu_max_short:
            self.mu_max_short = mu_s
        if self.mu_max_short - mu_s >= self.epsilon_short:
            alarm = True
        if len(self.block_sums) == self.n_blocks:
            mu_l = self.blocks_total / self.n_long
            self.mu_long = mu_l
            if mu_l > self.mu_max_long:
                self.mu_max_long = mu_l
            if self.mu_max_long - mu_l >= self.epsilon_long:
                alarm = True
        if alarm:
            self._alarm_reset()
            return DRIFT
        return STABLE

    def memory_cost(self):
        # n_l, n_s, delta, eps_l, eps_s, long sum, current sum/count, 2 means, 2 maxima
        return 12 * SCALAR_COST + SCALAR_COST * len(self.block_sums)
