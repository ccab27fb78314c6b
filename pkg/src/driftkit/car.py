"""The CAR measure: classification, adaptation and resource use folded into one score.

A measurement matrix holds one row per (classifier, detector) pair and six
lower-is-better columns.  Columns are min-max normalised across pairs, each
row is averaged under a weight vector, and ``Score = 1 - CAR``.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from functools import cached_property

import numpy as np

COLUMNS = ("error_rate", "mean_delay", "fp", "fn", "memory", "runtime")
WEIGHT_KEYS = ("w_e", "w_d", "w_fp", "w_fn", "w_m", "w_r")


@dataclass(frozen=True)
class MeasurementRow:
    error_rate: float
    mean_delay: float
    fp: float
    fn: float
    memory: float
    runtime: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be finite and >= 0, got {v}")

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


@dataclass(frozen=True)
class WeightVector:
    w_e: float = 1.0
    w_d: float = 1.0
    w_fp: float = 1.0
    w_fn: float = 1.0
    w_m: float = 1.0
    w_r: float = 1.0

    def __post_init__(self):
        values = astuple(self)
        if any(not math.isfinite(w) or w < 0 for w in values):
            raise ValueError(f"weights must be finite and >= 0, got {values}")
        if not any(w > 0 for w in values):
            raise ValueError("at least one weight must be positive")

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Accept ``"3 0 1.5 1 2 2"``, commas, or a bracketed list."""
        parts = text.strip().strip("[]").replace(",", " ").split()
        if len(parts) != 6:
            raise ValueError(f"expected 6 weights, got {len(parts)} in {text!r}")
        return cls(*(float(p) for p in parts))

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @cached_property
    def unit(self) -> np.ndarray:
        """Weights divided by their sum, computed exactly and then rounded.

        Proportional vectors map to the same floats, so CAR does not move
        when every weight is multiplied by the same factor.
        """
        exact = [Fraction(w) for w in astuple(self)]
        total = sum(exact)
        return np.array([float(w / total) for w in exact])

    def __str__(self):
        return " ".join(f"{w:g}" for w in astuple(self))


def normalize(matrix) -> np.ndarray:
    """Min-max normalise each column across pairs; constant columns map to 0.

    Accepts shape ``(pairs, 6)`` or a stack ``(..., pairs, 6)``; the pair axis
    is the second to last.
    """
    m = np.asarray(matrix, dtype=float)
    lo = m.min(axis=-2, keepdims=True)
    span = m.max(axis=-2, keepdims=True) - lo
    out = np.zeros_like(m)
    np.divide(m - lo, span, out=out, where=span > 0)
    return out


def car_values(normalized, weights: WeightVector) -> np.ndarray:
    """Weighted row means of a normalised matrix, shape ``(..., pairs)``."""
    car = np.asarray(normalized, dtype=float) @ weights.unit
    # summation order can push an all-ones row a rounding step past 1
    return np.clip(car, 0.0, 1.0)


@dataclass(frozen=True)
class ScoreBoard:
    car: np.ndarray
    score: np.ndarray
    recommended: int


def car_scores(normalized, weights: WeightVector) -> ScoreBoard:
    car = car_values(normalized, weights)
    score = 1.0 - car
    return ScoreBoard(car, score, recommend(score))


def recommend(scores) -> int:
    """Index of the highest score; the lowest index wins ties."""
    if isinstance(scores, ScoreBoard):
        scores = scores.score
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise ValueError("cannot recommend from an empty scoreboard")
    return int(np.argmax(s))


def score_matrix(rows, weights: WeightVector) -> ScoreBoard:
    """Rows of raw measurements straight to a scoreboard."""
    raw = [r.as_tuple() if isinstance(r, MeasurementRow) else tuple(r) for r in rows]
    return car_scores(normalize(raw), weights)
