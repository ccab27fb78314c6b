"""Hoeffding-bound detectors over moving averages (A-test) and EWMA (W-test).

Both monitor the error indicator for a significant increase.
"""

from __future__ import annotations

import math

from .base import DRIFT, SCALAR_COST, STABLE, WARNING, Detector, Verdict, check_bit


def _mean_increased(c_cut, n_cut, c_total, n_total, confidence):
    if n_cut == n_total:
        return False
    m = (n_total - n_cut) / n_cut * (1.0 / n_total)
    bound = math.sqrt(m / 2.0 * math.log(2.0 / confidence))
    return c_total / n_total - c_cut / n_cut >= bound


class HDDM_A(Detector):
    kind = "HDDM_A"
    has_warning = True
    op_cost = 2

    def __init__(self, drift_confidence: float = 0.001, warning_confidence: float = 0.005):
        super().__init__(drift_confidence=drift_confidence, warning_confidence=warning_confidence)
        self.drift_confidence = drift_confidence
        self.warning_confidence = warning_confidence
        self.reset()

    def reset(self):
        self.n_total = 0
        self.c_total = 0
        self.n_cut = 0
        self.c_cut = 0

    def step(self, bit: int) -> Verdict:
        x = 1 - check_bit(bit)
        self.n_total += 1
        self.c_total += x
        if self.n_cut == 0:
            self.n_cut, self.c_cut = self.n_total, self.c_total
        log_term = math.log(1.0 / self.drift_confidence)
        bound_cut = math.sqrt(log_term / (2.0 * self.n_cut))
        bound_total = math.sqrt(log_term / (2.0 * self.n_total))
        if self.c_cut / self.n_cut + bound_cut >= self.c_total / self.n_total + bound_total:
            self.n_cut, self.c_cut = self.n_total, self.c_total
        if _mean_increased(self.c_cut, self.n_cut, self.c_total, self.n_total,
                           self.drift_confidence):
            self._alarm_reset()
            return DRIFT
        if _mean_increased(self.c_cut, self.n_cut, self.c_total, self.n_total,
                           self.warning_confidence):
            return WARNING
        return STABLE

    def memory_cost(self):
        return 6 * SCALAR_COST


class _Ewma:
    __slots__ = ("estimate", "weight_sum")

    def __init__(self):
        self.estimate = None
        # sum of squared weights; bounds the EWMA's deviation
        self.weight_sum = 0.0

    def add(self, x, lam):
        if self.estimate is None:
            self.estimate = float(x)
            self.weight_sum = 1.0
        else:
            self.estimate = lam * x + (1.0 - lam) * self.estimate
            self.weight_sum = lam * lam + (1.0 - lam) ** 2 * self.weight_sum

    def copy_from(self, other):
        self.estimate = other.estimate
        self.weight_sum = other.weight_sum

    def __eq__(self, other):
        return (self.estimate, self.weight_sum) == (other.estimate, other.weight_sum)


class HDDM_W(Detector):
    kind = "HDDM_W"
    has_warning = True
    op_cost = 2

    def __init__(self, drift_confidence: float = 0.001, warning_confidence: float = 0.005,
                 lam: float = 0.05):
        super().__init__(drift_confidence=drift_confidence,
                         warning_confidence=warning_confidence, lam=lam)
        self.drift_confidence = drift_confidence
        self.warning_confidence = warning_confidence
        self.lam = lam
        self.reset()

    def reset(self):
        self.total = _Ewma()
        self.reference = _Ewma()  # EWMA frozen at the best (lowest) cut point
        self.recent = _Ewma()  # EWMA of everything after the cut point
        self.cut_bound = math.inf

    def _increased(self, confidence):
        r, s = self.reference, self.recent
        if r.estimate is None or s.estimate is None:
            return False
        bound = math.sqrt((r.weight_sum + s.weight_sum) * math.log(1.0 / confidence) / 2.0)
        return s.estimate - r.estimate > bound

    def step(self, bit: int) -> Verdict:
        x = 1 - check_bit(bit)
        self.total.add(x, self.lam)
        bound = math.sqrt(self.total.weight_sum * math.log(1.0 / self.drift_confidence) / 2.0)
        if self.total.estimate + bound < self.cut_bound:
            self.cut_bound = self.total.estimate + bound
            self.reference.copy_from(self.total)
            self.recent = _Ewma()
        else:
            self.recent.add(x, self.lam)
        if self._increased(self.drift_confidence):
            self._alarm_reset()
            return DRIFT
        if self._increased(self.warning_confidence):
            return WARNING
        return STABLE

    def memory_cost(self):
        return 11 * SCALAR_COST
