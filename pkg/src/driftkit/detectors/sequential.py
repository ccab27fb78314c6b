"""Error-rate based detectors: CUSUM, Page-Hinkley, DDM and EDDM.

All four watch the error indicator ``x = 1 - bit``.
"""

from __future__ import annotations

import math

from .base import DRIFT, SCALAR_COST, STABLE, WARNING, Detector, Verdict, check_bit


class CUSUM(Detector):
    """``g = max(0, g + x - delta)``; alarms when ``g > lam``.

    With ``centered=True`` (default) ``x`` is the residual of the error
    indicator against its running mean, so a stationary error rate keeps
    ``g`` near zero.  ``centered=False`` feeds the raw indicator.
    """

    kind = "CUSUM"

    def __init__(self, delta: float = 0.005, lam: float = 50.0, min_instances: int = 30,
                 centered: bool = True):
        super().__init__(delta=delta, lam=lam, min_instances=min_instances, centered=centered)
        self.delta = delta
        self.lam = lam
        self.min_instances = min_instances
        self.centered = centered
        self.reset()

    def reset(self):
        self.n = 0
        self.mean = 0.0
        self.g = 0.0

    def step(self, bit: int) -> Verdict:
        x = 1 - check_bit(bit)
        self.n += 1
        if self.centered:
            self.mean += (x - self.mean) / self.n
            x = x - self.mean
        self.g = max(0.0, self.g + x - self.delta)
        if self.n >= self.min_instances and self.g > self.lam:
            self._alarm_reset()
            return DRIFT
        return STABLE

    def memory_cost(self):
        return 7 * SCALAR_COST


class PageHinkley(Detector):
    """Cumulative deviation from the running mean against its minimum."""

    kind = "PH"

    def __init__(self, delta: float = 0.005, lam: float = 50.0, min_instances: int = 30):
        super().__init__(delta=delta, lam=lam, min_instances=min_instances)
        self.delta = delta
        self.lam = lam
        self.min_instances = min_instances
        self.reset()

    def reset(self):
        self.n = 0
        self.mean = 0.0
        self.m = 0.0
        self.m_min = 0.0

    def step(self, bit: int) -> Verdict:
        x = 1 - check_bit(bit)
        self.n += 1
        self.mean += (x - self.mean) / self.n
        self.m += x - self.mean - self.delta
        if self.m < self.m_min:
            self.m_min = self.m
        if self.n >= self.min_instances and self.m - self.m_min > self.lam:
            self._alarm_reset()
            return DRIFT
        return STABLE

    def memory_cost(self):
        return 7 * SCALAR_COST


class DDM(Detector):
    kind = "DDM"
    has_warning = True

    def __init__(self, min_instances: int = 30, warning_level: float = 2.0,
                 drift_level: float = 3.0):
        super().__init__(min_instances=min_instances, warning_level=warning_level,
                         drift_level=drift_level)
        self.min_instances = min_instances
        self.warning_level = warning_level
        self.drift_level = drift_level
        self.reset()

    def reset(self):
        self.n = 0
        self.p = 0.0
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf
        self.ps_min = math.inf

    def step(self, bit: int) -> Verdict:
        x = 1 - check_bit(bit)
        self.n += 1
        self.p += (x - self.p) / self.n
        self.s = math.sqrt(self.p * (1.0 - self.p) / self.n)
        if self.n < self.min_instances:
            return STABLE
        ps = self.p + self.s
        if ps <= self.ps_min:
            self.p_min, self.s_min, self.ps_min = self.p, self.s, ps
        if ps > self.p_min + self.drift_level * self.s_min:
            self._alarm_reset()
            return DRIFT
        if ps > self.p_min + self.warning_level * self.s_min:
            return WARNING
        return STABLE

    def memory_cost(self):
        return 9 * SCALAR_COST


class EDDM(Detector):
    """Tracks the distance between consecutive errors."""

    kind = "EDDM"
    has_warning = True

    def __init__(self, alpha: float = 0.95, beta: float = 0.90, min_errors: int = 30):
        super().__init__(alpha=alpha, beta=beta, min_errors=min_errors)
        self.alpha = alpha
        self.beta = beta
        self.min_errors = min_errors
        self.reset()

    def reset(self):
        self.n = 0
        self.errors = 0
        self.last_error = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.m2s_max = 0.0

    def step(self, bit: int) -> Verdict:
        x = 1 - check_bit(bit)
        self.n += 1
        if not x:
            return STABLE
        self.errors += 1
        distance = self.n - self.last_error
        self.last_error = self.n
        old_mean = self.mean
        self.mean += (distance - self.mean) / self.errors
        self.m2 += (distance - self.mean) * (distance - old_mean)
        m2s = self.mean + 2.0 * math.sqrt(self.m2 / self.errors)
        if self.errors < self.min_errors:
            if m2s > self.m2s_max:
                self.m2s_max = m2s
            return STABLE
        if m2s > self.m2s_max:
            self.m2s_max = m2s
            return STABLE
        ratio = m2s / self.m2s_max
        if ratio < self.beta:
            self._alarm_reset()
            return DRIFT
        if ratio < self.alpha:
            return WARNING
        return STABLE

    def memory_cost(self):
        return 9 * SCALAR_COST
