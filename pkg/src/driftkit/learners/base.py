from __future__ import annotations

import copy
from dataclasses import dataclass

from ..detectors.base import format_param
from ..streams import Instance, SchemaMismatch, StreamSchema

SCALAR_COST = 8


@dataclass(frozen=True)
class Prediction:
    label: str
    correct: int


class Learner:
    """Incremental classifier with test-then-train bookkeeping.

    ``predict`` scores an instance against the current model and updates the
    cumulative mistake/processed counters; ``learn`` trains on it.  ``reset``
    restores the untrained model but keeps the counters.
    """

    kind = "learner"
    op_cost = 1

    def __init__(self, schema: StreamSchema, **params):
        self.schema = schema
        self.params = params
        self.classes = schema.classes
        self.class_index = {c: i for i, c in enumerate(schema.classes)}
        self.nominal = [a.nominal for a in schema.attributes]
        self.value_index = [
            {v: i for i, v in enumerate(a.domain)} if a.nominal else None
            for a in schema.attributes
        ]
        self.mistakes = 0
        self.processed = 0
        self.reset()

    # model hooks -------------------------------------------------------

    def reset(self) -> None:
        raise NotImplementedError

    def predict_label(self, features: tuple) -> str:
        raise NotImplementedError

    def _learn(self, features: tuple, y: int) -> None:
        raise NotImplementedError

    def memory_cost(self) -> int:
        raise NotImplementedError

    # public contract ---------------------------------------------------

    def _check(self, instance: Instance):
        if len(instance.features) != self.schema.arity:
            raise SchemaMismatch(
                f"{self.kind}: expected {self.schema.arity} features, got {len(instance.features)}")

    def predict(self, instance: Instance) -> Prediction:
        self._check(instance)
        label = self.predict_label(instance.features)
        correct = int(label == instance.label)
        self.processed += 1
        self.mistakes += 1 - correct
        return Prediction(label, correct)

    def learn(self, instance: Instance) -> None:
        self._check(instance)
        try:
            y = self.class_index[instance.label]
        except KeyError:
            raise SchemaMismatch(f"{self.kind}: unknown class {instance.label!r}") from None
        self._learn(instance.features, y)

    @property
    def error_rate(self) -> float:
        return self.mistakes / self.processed if self.processed else 0.0

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        args = ",".join(f"{k}={format_param(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({args})"

    def fresh(self) -> "Learner":
        return type(self)(self.schema, **self.params)

    def model_state(self) -> dict:
        skip = {"schema", "params", "classes", "class_index", "nominal", "value_index",
                "mistakes", "processed"}
        return copy.deepcopy({k: v for k, v in vars(self).items() if k not in skip})

    def __repr__(self):
        return f"<{self.name}>"


def majority(counts) -> int:
    """Index of the largest count; ties go to the lowest index."""
    best, best_i = counts[0], 0
    for i in range(1, len(counts)):
        if counts[i] > best:
            best, best_i = counts[i], i
    return best_i
