"""Run every (classifier, detector) pair on one broadcast stream and track the CAR leader.

Pairs are partitioned across worker processes.  The main process reads the
stream in blocks and hands each block to every worker; a worker runs its
pairs test-then-train over the block and returns their measurement rows at
each cadence tick inside it.  Scoring happens in the main process, once all
rows of a block are in, so the timeline does not depend on how pairs were
spread over workers.
"""

from __future__ import annotations

import bisect
import csv
import itertools
import multiprocessing as mp
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .car import COLUMNS, ScoreBoard, WeightVector, car_scores, car_values, normalize
from .detectors import DETECTORS, make_detector, parse_spec
from .evaluation import PairRun, RunResult
from .learners import LEARNERS, make_learner
from .streams import DriftSchedule, Instance, SchemaMismatch, StreamSchema

DEFAULT_BLOCK = 2000
TIMELINE_COLUMNS = ("t", "pair_id", "classifier", "detector", "score")
TRACE_COLUMNS = ("t", "pair_id", "car", "score", "recommended")
REPORT_COLUMNS = ("pair_id", "classifier", "detector", "delay", "tp", "fp", "fn", "memory",
                  "runtime", "error_rate", "car", "score")


class PairError(RuntimeError):
    """A pair failed while processing the stream."""

    def __init__(self, pair_id: str, message: str):
        super().__init__(f"pair {pair_id}: {message}")
        self.pair_id = pair_id


@dataclass
class PairState:
    pair_id: str
    classifier: str
    detector: str
    run: PairRun

    @property
    def learner(self):
        return self.run.learner

    @property
    def detector_handle(self):
        return self.run.detector


def _canonical(spec: str, registry: dict) -> str:
    kind, params = parse_spec(spec)
    lookup = {k.lower(): k for k in registry}
    if kind.lower() not in lookup:
        raise KeyError(f"unknown kind {kind!r}; valid kinds: {', '.join(registry)}")
    return kind


def build_pairs(classifiers: Sequence[str], detectors: Sequence[str], schema: StreamSchema,
                schedule: DriftSchedule, runtime_mode: str = "ms", adapt: bool = True,
                learner_params: dict | None = None, detector_params: dict | None = None
                ) -> list[PairState]:
    """Cross product of classifier and detector specs, classifier-major.

    ``learner_params`` / ``detector_params`` map a kind (case-insensitive) to
    keyword overrides applied to every spec of that kind.
    """
    if not classifiers:
        raise ValueError("at least one classifier is required")
    if not detectors:
        raise ValueError("at least one detector is required")
    lp = {k.lower(): v for k, v in (learner_params or {}).items()}
    dp = {k.lower(): v for k, v in (detector_params or {}).items()}
    pairs = []
    seen = set()
    for c_spec, d_spec in itertools.product(classifiers, detectors):
        c_kind = _canonical(c_spec, LEARNERS)
        d_kind = _canonical(d_spec, DETECTORS)
        learner = make_learner(c_spec, schema, **lp.get(c_kind.lower(), {}))
        detector = make_detector(d_spec, **dp.get(d_kind.lower(), {}))
        pair_id = f"{learner.name}|{detector.name}"
        if pair_id in seen:
            raise ValueError(f"duplicate pair {pair_id}")
        seen.add(pair_id)
        run = PairRun(learner, detector, schedule, runtime_mode, adapt, pair_id)
        pairs.append(PairState(pair_id, learner.name, detector.name, run))
    return pairs


@dataclass(frozen=True)
class TimelineEntry:
    t: int
    pair_index: int
    pair_id: str
    score: float


@dataclass
class RecommendationTimeline:
    entries: list[TimelineEntry] = field(default_factory=list)

    def append(self, entry: TimelineEntry) -> None:
        if self.entries and entry.t <= self.entries[-1].t:
            raise ValueError("timeline indices must strictly increase")
        self.entries.append(entry)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ticks(self) -> list[int]:
        return [e.t for e in self.entries]


def replay(timeline: RecommendationTimeline, t: int) -> str:
    """Pair id recommended at instance ``t`` (the latest tick at or before ``t``)."""
    ticks = timeline.ticks
    i = bisect.bisect_right(ticks, t) - 1
    if i < 0:
        raise LookupError(f"no recommendation before instance {t}")
    return timeline.entries[i].pair_id


@dataclass
class PairReport:
    pair_id: str
    classifier: str
    detector: str
    result: RunResult
    car: float
    score: float

    def row(self):
        r = self.result
        return (self.pair_id, self.classifier, self.detector, repr(r.score.mean_delay),
                r.score.tp, r.score.fp, r.score.fn, repr(r.meter.memory_cost),
                repr(r.meter.detection_runtime), repr(r.error_rate), repr(self.car),
                repr(self.score))


@dataclass
class RunOutcome:
    timeline: RecommendationTimeline
    scoreboard: ScoreBoard
    reports: list[PairReport]
    trace: list[tuple] = field(default_factory=list)
    pair_ids: list[str] = field(default_factory=list)


def _tick_offsets(start: int, stop: int, cadence: int) -> list[int]:
    """Block-relative offsets of the cadence ticks among instances ``start..stop-1``."""
    first = start + (-(start + 1)) % cadence
    return [t - start for t in range(first, stop, cadence)]


def _process_block(pairs: list[PairState], start: int, block: Sequence[Instance],
                   offsets: Sequence[int]) -> np.ndarray:
    rows = np.zeros((len(offsets), len(pairs), len(COLUMNS)))
    for p_i, pair in enumerate(pairs):
        run = pair.run
        process = run.process
        k = 0
        try:
            for tick_i, off in enumerate(offsets):
                while k <= off:
                    process(start + k, block[k])
                    k += 1
                rows[tick_i, p_i] = run.measurement()
            while k < len(block):
                process(start + k, block[k])
                k += 1
        except SchemaMismatch as exc:
            raise PairError(pair.pair_id, str(exc)) from exc
    return rows


def _worker(conn, pairs):
    try:
        while True:
            msg = conn.recv()
            if msg[0] == "block":
                _, start, block, offsets = msg
                try:
                    conn.send(("rows", _process_block(pairs, start, block, offsets)))
                except PairError as exc:
                    conn.send(("error", exc.pair_id, str(exc)))
                    return
            elif msg[0] == "extra":
                # measurement at an off-cadence final tick
                conn.send(("rows", np.array([[p.run.measurement() for p in pairs]])))
            else:
                conn.send(("done", [p.run.finish() for p in pairs]))
                return
    except Exception:
        conn.send(("crash", traceback.format_exc()))
    finally:
        conn.close()


class _Inline:
    """Same message protocol as a worker process, executed in-process."""

    def __init__(self, pairs):
        self.pairs = pairs

    def block(self, start, block, offsets):
        return _process_block(self.pairs, start, block, offsets)

    def extra(self):
        return np.array([[p.run.measurement() for p in self.pairs]])

    def finish(self):
        return [p.run.finish() for p in self.pairs]


class _Remote:
    def __init__(self, ctx, pairs):
        self.conn, child = ctx.Pipe()
        self.proc = ctx.Process(target=_worker, args=(child, pairs), daemon=True)
        self.proc.start()
        child.close()

    def send(self, msg):
        self.conn.send(msg)

    def receive(self):
        msg = self.conn.recv()
        if msg[0] == "error":
            raise PairError(msg[1], msg[2].split(": ", 1)[-1])
        if msg[0] == "crash":
            raise RuntimeError(f"worker failed:\n{msg[1]}")
        return msg[1]

    def close(self):
        self.conn.close()
        self.proc.join(timeout=5)
        if self.proc.is_alive():
            self.proc.terminate()


def run(stream: Iterable[Instance], pairs: list[PairState], weights: WeightVector,
        cadence: int = 1, workers: int = 1, block_size: int = DEFAULT_BLOCK,
        trace_every: int | None = None, limit: int | None = None) -> RunOutcome:
    """Broadcast ``stream`` to every pair and score them at each cadence tick.

    A final tick is added at the last instance when it is not a cadence
    multiple, so the final scoreboard always reflects the whole stream.
    ``trace_every`` keeps the per-pair CAR/score rows of every tick whose
    index is a multiple of it (plus the final tick).  ``limit`` stops after
    that many instances.

    With ``workers > 1`` pair state lives in the worker processes and the
    caller's ``pairs`` are left untouched; the reports carry the results.
    """
    if not pairs:
        raise ValueError("no pairs to run")
    if cadence < 1 or block_size < 1 or workers < 1:
        raise ValueError("cadence, block_size and workers must be >= 1")
    ids = [p.pair_id for p in pairs]
    if len(set(ids)) != len(ids):
        raise ValueError("pair ids must be unique")
    n_pairs = len(pairs)
    workers = min(workers, n_pairs)
    # round-robin assignment; slots[w] lists the global pair indices of worker w
    slots = [list(range(w, n_pairs, workers)) for w in range(workers)]
    if workers == 1:
        handles = [_Inline(pairs)]
        ctx = None
    else:
        ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
        handles = [_Remote(ctx, [pairs[i] for i in slot]) for slot in slots]

    timeline = RecommendationTimeline()
    trace: list[tuple] = []
    last_rows = None
    last_t = -1

    def gather(kind, *args):
        if ctx is None:
            parts = [getattr(handles[0], kind)(*args)]
        else:
            for h in handles:
                h.send((kind, *args))
            parts = [h.receive() for h in handles]
        if kind == "finish":
            out = [None] * n_pairs
            for slot, part in zip(slots, parts):
                for i, res in zip(slot, part):
                    out[i] = res
            return out
        rows = np.zeros(parts[0].shape[:1] + (n_pairs, len(COLUMNS)))
        for slot, part in zip(slots, parts):
            rows[:, slot] = part
        return rows

    def score(ticks, rows):
        nonlocal last_rows
        if not ticks:
            return
        cars = car_values(normalize(rows), weights)
        scores = 1.0 - cars
        best = np.argmax(scores, axis=1)
        for i, t in enumerate(ticks):
            b = int(best[i])
            timeline.append(TimelineEntry(t, b, ids[b], float(scores[i, b])))
            if trace_every and t % trace_every == 0:
                for p in range(n_pairs):
                    trace.append((t, ids[p], float(cars[i, p]), float(scores[i, p]), int(p == b)))
        last_rows = rows[-1]

    try:
        it = iter(stream)
        if limit is not None:
            it = itertools.islice(it, limit)
        start = 0
        while True:
            block = list(itertools.islice(it, block_size))
            if not block:
                break
            offsets = _tick_offsets(start, start + len(block), cadence)
            rows = gather("block", start, block, offsets)
            score([start + o for o in offsets], rows)
            start += len(block)
            last_t = start - 1
        if last_t < 0:
            raise ValueError("the stream is empty")
        if not timeline.entries or timeline.entries[-1].t != last_t:
            rows = gather("extra")
            score([last_t], rows)
        if trace_every and (not trace or trace[-1][0] != last_t):
            cars = car_values(normalize(last_rows), weights)
            b = timeline.entries[-1].pair_index
            for p in range(n_pairs):
                trace.append((last_t, ids[p], float(cars[p]), float(1.0 - cars[p]), int(p == b)))
        results = gather("finish")
    finally:
        if ctx is not None:
            for h in handles:
                h.close()

    board = car_scores(normalize(last_rows), weights)
    reports = [PairReport(p.pair_id, p.classifier, p.detector, res,
                          float(board.car[i]), float(board.score[i]))
               for i, (p, res) in enumerate(zip(pairs, results))]
    return RunOutcome(timeline, board, reports, trace, ids)


def _split_id(pair_id: str) -> tuple[str, str]:
    c, _, d = pair_id.partition("|")
    return c, d


def write_timeline(timeline: RecommendationTimeline, path: str | Path, header: Sequence[str] = (),
                   delimiter: str = ",") -> None:
    """Timeline CSV; ``header`` lines are written first, each prefixed with ``#``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(TIMELINE_COLUMNS)
        for e in timeline:
            c, d = _split_id(e.pair_id)
            w.writerow((e.t, e.pair_id, c, d, repr(e.score)))


def write_trace(trace: Sequence[tuple], path: str | Path, header: Sequence[str] = (),
                delimiter: str = ",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(TRACE_COLUMNS)
        for t, pid, car, score, rec in trace:
            w.writerow((t, pid, repr(car), repr(score), rec))


def write_reports(reports: Sequence[PairReport], path: str | Path, header: Sequence[str] = (),
                  delimiter: str = ",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow(r.row())
