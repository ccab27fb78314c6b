"""Incremental classifiers sharing the test-then-train contract of :class:`Learner`."""

from __future__ import annotations

from ..detectors import parse_spec
from .base import Learner, Prediction, majority
from .hoeffding_tree import DecisionStump, HoeffdingTree, hoeffding_bound, info_gain
from .knn import KNN
from .linear import Perceptron
from .naive_bayes import GaussianEstimator, NaiveBayes

LEARNERS: dict[str, type[Learner]] = {
    cls.kind: cls for cls in (NaiveBayes, DecisionStump, HoeffdingTree, Perceptron, KNN)
}

DEFAULT_LEARNER_SPECS = ("NB", "DS", "HT", "Perceptron", "KNN")


def make_learner(spec: str, schema, **overrides) -> Learner:
    kind, params = parse_spec(spec)
    lookup = {k.lower(): v for k, v in LEARNERS.items()}
    try:
        cls = lookup[kind.lower()]
    except KeyError:
        raise KeyError(f"unknown learner {kind!r}; valid kinds: {', '.join(LEARNERS)}") from None
    params.update(overrides)
    return cls(schema, **params)


__all__ = [
    "DEFAULT_LEARNER_SPECS", "DecisionStump", "GaussianEstimator", "HoeffdingTree", "KNN",
    "LEARNERS", "Learner", "NaiveBayes", "Perceptron", "Prediction", "hoeffding_bound",
    "info_gain", "majority", "make_learner",
]
