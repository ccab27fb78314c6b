"""Prequential harness, acceptable-delay drift scoring and resource accounting."""

from __future__ import annotations

import bisect
import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .detectors import DRIFT, WARNING, Detector
from .learners import Learner
from .streams import DriftSchedule, Instance

RUNTIME_MODES = ("ms", "ops")
ALARM_LOG_COLUMNS = ("pair_id", "instance_index", "event", "value")


@dataclass
class DriftScore:
    """TP/FP/FN counts under the acceptable-delay rule.

    ``mean_delay`` averages the true-positive delays; with no true positive
    it is the acceptable delay itself, the worst admissible value, so a pair
    that never detects is not rewarded with a zero delay.
    """

    delta_accept: int
    tp: int = 0
    fp: int = 0
    fn: int = 0
    delays: list[int] = field(default_factory=list)

    @property
    def mean_delay(self) -> float:
        if not self.delays:
            return float(self.delta_accept)
        return sum(self.delays) / len(self.delays)

    @property
    def alarms(self) -> int:
        return self.tp + self.fp


class DriftTracker:
    """Incremental version of :func:`score_alarms`.

    Call :meth:`alarm` for every alarm and :meth:`advance` whenever the
    counts should be brought up to date; windows close (and become false
    negatives when unmatched) once ``t`` moves past their end.
    """

    def __init__(self, schedule: DriftSchedule):
        self.locations = schedule.drift_locations
        self.delta = schedule.delta_accept
        self.score = DriftScore(schedule.delta_accept)
        self._matched = [False] * len(self.locations)
        self._first_open = 0

    def advance(self, t: int) -> None:
        """Close every window that ends before instance ``t``."""
        locs, delta, matched = self.locations, self.delta, self._matched
        j = self._first_open
        while j < len(locs) and locs[j] + delta < t:
            if not matched[j]:
                self.score.fn += 1
            j += 1
        self._first_open = j

    def alarm(self, t: int) -> bool:
        """Register an alarm at instance ``t``; return True when it is a true positive."""
        self.advance(t)
        locs, delta = self.locations, self.delta
        j = self._first_open
        while j < len(locs) and locs[j] <= t:
            if not self._matched[j] and t <= locs[j] + delta:
                self._matched[j] = True
                self.score.tp += 1
                self.score.delays.append(t - locs[j])
                return True
            j += 1
        self.score.fp += 1
        return False

    def finish(self, horizon: int | None = None) -> DriftScore:
        """Close all windows fully inside ``[0, horizon)`` (all of them when ``horizon`` is None)."""
        if horizon is None:
            self.advance(self.locations[-1] + self.delta + 1 if self.locations else 0)
        else:
            self.advance(horizon)
        return self.score


def score_alarms(alarms: Iterable[int], schedule: DriftSchedule,
                 horizon: int | None = None) -> DriftScore:
    """Score alarm indices against the true drift points.

    The first alarm inside ``[t0, t0 + delta_accept]`` is a true positive;
    every other alarm is a false positive; a window without an alarm is a
    false negative once it has fully elapsed before ``horizon``.
    """
    locs = schedule.drift_locations
    delta = schedule.delta_accept
    score = DriftScore(delta)
    matched = [False] * len(locs)
    for a in sorted(alarms):
        # earliest unmatched window containing a
        j = bisect.bisect_left(locs, a - delta)
        hit = False
        while j < len(locs) and locs[j] <= a:
            if not matched[j]:
                matched[j] = True
                score.tp += 1
                score.delays.append(a - locs[j])
                hit = True
                break
            j += 1
        if not hit:
            score.fp += 1
    for j, t0 in enumerate(locs):
        if not matched[j] and (horizon is None or t0 + delta < horizon):
            score.fn += 1
    return score


@dataclass
class ResourceMeter:
    """Runtime and memory accounting for one (learner, detector) pair.

    ``mode="ms"`` accumulates monotonic wall time in milliseconds; ``"ops"``
    charges each component's ``op_cost`` per instance, which is deterministic.
    Memory is the detector's cost-model reading at each alarm, taken before
    the detector clears its state.
    """

    mode: str = "ms"
    runtime: float = 0.0
    detection_runtime: float = 0.0
    snapshots: list[int] = field(default_factory=list)
    current_memory: int = 0
    context_runtime: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in RUNTIME_MODES:
            raise ValueError(f"runtime mode must be one of {RUNTIME_MODES}, got {self.mode!r}")

    @property
    def memory_cost(self) -> float:
        """Mean of the alarm-time snapshots, or the latest reading before any alarm."""
        if self.snapshots:
            return sum(self.snapshots) / len(self.snapshots)
        return float(self.current_memory)

    def charge_context(self, context: int, amount: float) -> None:
        while len(self.context_runtime) <= context:
            self.context_runtime.append(0.0)
        self.context_runtime[context] += amount


@dataclass(frozen=True)
class AlarmEvent:
    pair_id: str
    instance_index: int
    event: str
    value: float

    def row(self):
        return (self.pair_id, self.instance_index, self.event, repr(self.value))


@dataclass
class RunResult:
    score: DriftScore
    error_rate: float
    meter: ResourceMeter
    alarm_log: list[AlarmEvent]
    processed: int = 0


class PairRun:
    """Test-then-train state of one (learner, detector) pair.

    :meth:`process` handles one instance: predict, feed the correctness bit
    to the detector, learn.  On DRIFT the detector's memory is snapshotted
    and, when ``adapt`` is set, both learner and detector are reset.
    WARNING verdicts are logged when a warning period starts and otherwise
    ignored.  Alarm-log values carry the learner's cumulative error rate.
    """

    def __init__(self, learner: Learner, detector: Detector, schedule: DriftSchedule,
                 runtime_mode: str = "ms", adapt: bool = True, pair_id: str | None = None):
        self.learner = learner
        self.detector = detector
        self.schedule = schedule
        self.adapt = adapt
        self.pair_id = pair_id or f"{learner.name}|{detector.name}"
        self.meter = ResourceMeter(runtime_mode)
        self.tracker = DriftTracker(schedule)
        self.alarm_log: list[AlarmEvent] = []
        self.processed = 0
        self._ops = runtime_mode == "ops"
        self._op_all = learner.op_cost + detector.op_cost
        self._boundaries = schedule.drift_locations
        self._context = 0
        self._ctx_runtime = 0.0
        self._in_warning = False

    def process(self, t: int, inst: Instance) -> None:
        learner, detector, meter = self.learner, self.detector, self.meter
        bounds = self._boundaries
        if self._context < len(bounds) and t >= bounds[self._context]:
            meter.charge_context(self._context, self._ctx_runtime)
            self._ctx_runtime = 0.0
            self._context += 1
        if self._ops:
            p = learner.predict(inst)
            verdict = detector.step(p.correct)
        else:
            clock = time.perf_counter
            c0 = clock()
            p = learner.predict(inst)
            c1 = clock()
            verdict = detector.step(p.correct)
            c2 = clock()
        if verdict is DRIFT:
            snap = detector.alarm_memory
            meter.snapshots.append(detector.memory_cost() if snap is None else snap)
            detector.alarm_memory = None
            self.tracker.alarm(t)
            self.alarm_log.append(AlarmEvent(self.pair_id, t, "drift", learner.error_rate))
            self._in_warning = False
            if self.adapt:
                learner.reset()
                detector.reset()
        elif verdict is WARNING:
            if not self._in_warning:
                self.alarm_log.append(AlarmEvent(self.pair_id, t, "warning", learner.error_rate))
            self._in_warning = True
        else:
            self._in_warning = False
        if self._ops:
            learner.learn(inst)
            cost, det_cost = self._op_all, detector.op_cost
        else:
            c3 = clock()
            learner.learn(inst)
            c4 = clock()
            det_cost = (c2 - c1) * 1e3
            cost = (c1 - c0 + c4 - c3) * 1e3 + det_cost
        meter.runtime += cost
        meter.detection_runtime += det_cost
        self._ctx_runtime += cost
        self.processed = t + 1

    def measurement(self) -> tuple[float, float, float, float, float, float]:
        """Current CAR row: error rate, mean delay, FP, FN, pair memory, pair runtime."""
        self.tracker.advance(self.processed)
        self.meter.current_memory = self.detector.memory_cost()
        s = self.tracker.score
        memory = self.meter.memory_cost + self.learner.memory_cost()
        return (self.learner.error_rate, s.mean_delay, float(s.fp), float(s.fn),
                float(memory), self.meter.runtime)

    def finish(self) -> "RunResult":
        self.meter.charge_context(self._context, self._ctx_runtime)
        self._ctx_runtime = 0.0
        self.meter.current_memory = self.detector.memory_cost()
        score = self.tracker.finish(self.processed)
        return RunResult(score, self.learner.error_rate, self.meter, self.alarm_log,
                         self.processed)


def prequential_run(stream: Iterable[Instance], learner: Learner, detector: Detector,
                    schedule: DriftSchedule, runtime_mode: str = "ms", adapt: bool = True,
                    pair_id: str | None = None) -> RunResult:
    """Run one pair over ``stream`` and score its alarms against ``schedule``."""
    run = PairRun(learner, detector, schedule, runtime_mode, adapt, pair_id)
    process = run.process
    for t, inst in enumerate(stream):
        process(t, inst)
    return run.finish()


def write_alarm_log(events: Sequence[AlarmEvent], path: str | Path, delimiter: str = ",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(ALARM_LOG_COLUMNS)
        for e in events:
            w.writerow(e.row())


def read_alarm_log(path: str | Path, delimiter: str = ",") -> list[AlarmEvent]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh, delimiter=delimiter)
        header = next(r, None)
        if tuple(header or ()) != ALARM_LOG_COLUMNS:
            raise ValueError(f"{path}: unexpected alarm-log header {header}")
        return [AlarmEvent(p, int(i), e, float(v)) for p, i, e, v in r]
