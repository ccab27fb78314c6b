from __future__ import annotations

import copy
import enum

SCALAR_COST = 8


class Verdict(enum.Enum):
    STABLE = "stable"
    WARNING = "warning"
    DRIFT = "drift"


STABLE = Verdict.STABLE
WARNING = Verdict.WARNING
DRIFT = Verdict.DRIFT


class Detector:
    """Step contract shared by every drift detector.

    ``step`` takes one prediction-correctness bit (1 = correct) and returns a
    :class:`Verdict`.  Detectors that model errors convert internally.
    """

    kind = "detector"
    has_warning = False
    # op-count units charged per step in deterministic runtime mode
    op_cost = 1
    # memory reading taken right before the state was cleared by the last alarm
    alarm_memory: int | None = None

    def __init__(self, **params):
        self.params = params

    def reset(self) -> None:
        raise NotImplementedError

    def step(self, bit: int) -> Verdict:
        raise NotImplementedError

    def _alarm_reset(self) -> None:
        self.alarm_memory = self.memory_cost()
        self.reset()

    def memory_cost(self) -> int:
        """Deterministic size of the live state in cost units (scalar = 8, stored bit = 1)."""
        raise NotImplementedError

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        args = ",".join(f"{k}={format_param(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({args})"

    def fresh(self) -> "Detector":
        return type(self)(**self.params)

    def state(self) -> dict:
        """Deep copy of the mutable state, for equality checks."""
        skip = ("params", "alarm_memory")
        return copy.deepcopy({k: v for k, v in vars(self).items() if k not in skip})

    def __repr__(self):
        return f"<{self.name}>"


def format_param(value) -> str:
    """Shortest text that parses back to ``value`` (``50.0`` prints as ``50``)."""
    if isinstance(value, float):
        text = repr(value)
        return text[:-2] if text.endswith(".0") else text
    return str(value)


def check_bit(bit) -> int:
    if bit != 0 and bit != 1:
        raise ValueError(f"detector input must be 0 or 1, got {bit!r}")
    return int(bit)
