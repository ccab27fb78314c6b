"""Naive reference detectors that recompute every mean from the stored bits."""

import math


class NaiveFHDDM:
    """Recomputes every mean from the explicit list of stored bits."""

    def __init__(self, n, delta):
        self.n, self.eps = n, math.sqrt(math.log(1 / delta) / (2 * n))
        self.bits, self.mu_max, self.mu_t = [], 0.0, None

    def step(self, b):
        self.bits = (self.bits + [b])[-self.n:]
        if len(self.bits) < self.n:
            return False
        self.mu_t = sum(self.bits) / self.n
        self.mu_max = max(self.mu_max, self.mu_t)
        if self.mu_max - self.mu_t >= self.eps:
            self.bits, self.mu_max, self.mu_t = [], 0.0, None
            return True
        return False


class NaiveFHDDMS:
    def __init__(self, n_l, n_s, delta):
        self.n_l, self.n_s = n_l, n_s
        self.eps_l = math.sqrt(math.log(1 / delta) / (2 * n_l))
        self.eps_s = math.sqrt(math.log(1 / delta) / (2 * n_s))
        self.clear()

    def clear(self):
        self.bits, self.max_l, self.max_s = [], 0.0, 0.0
        self.mu_l = self.mu_s = None

    def step(self, b):
        self.bits = (self.bits + [b])[-self.n_l:]
        alarm = False
        if len(self.bits) >= self.n_s:
            self.mu_s = sum(self.bits[-self.n_s:]) / self.n_s
            self.max_s = max(self.max_s, self.mu_s)
            alarm |= self.max_s - self.mu_s >= self.eps_s
        if len(self.bits) == self.n_l:
            self.mu_l = sum(self.bits) / self.n_l
            self.max_l = max(self.max_l, self.mu_l)
            alarm |= self.max_l - self.mu_l >= self.eps_l
        if alarm:
            self.clear()
        return alarm


class NaiveFHDDMSAdd(NaiveFHDDMS):
    def clear(self):
        super().clear()
        self.pending = []
        self.blocks = []

    def step(self, b):
        self.pending.append(b)
        if len(self.pending) < self.n_s:
            return False
        self.blocks = (self.blocks + [sum(self.pending)])[-(self.n_l // self.n_s):]
        self.pending = []
        alarm = False
        self.mu_s = self.blocks[-1] / self.n_s
        self.max_s = max(self.max_s, self.mu_s)
        alarm |= self.max_s - self.mu_s >= self.eps_s
        if len(self.blocks) == self.n_l // self.n_s:
            self.mu_l = sum(self.blocks) / self.n_l
            self.max_l = max(self.max_l, self.mu_l)
            alarm |= self.max_l - self.mu_l >= self.eps_l
        if alarm:
            self.clear()
        return alarm
