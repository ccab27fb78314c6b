"""Command-line front end.

Subcommands::

    driftkit epsilon-table [--n 25,100] [--delta 1e-3,1e-7]
    driftkit gen SINE1 --out sine1.csv [--seed 1 --total 100000 --noise 0.1]
    driftkit detect [--config FILE] [--set key=value ...] [--detector SPEC ...]
    driftkit tornado [--config FILE] [--set key=value ...]

Experiments are described by a flat ``key = value`` file (see
:class:`ExperimentConfig`); ``--set`` overrides single keys.  Every CSV the
tool writes starts with ``#`` header lines that echo the full configuration,
including the root seed, and re-parse to the same configuration.
"""

from __future__ import annotations

import argparse
import csv
import os
import statistics
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from . import __version__
from .car import WEIGHT_KEYS, WeightVector
from .detectors import DEFAULT_DETECTOR_SPECS, DETECTORS, fhddm_epsilon, make_detector, parse_spec, parse_value
from .detectors.base import format_param
from .evaluation import RUNTIME_MODES, prequential_run
from .learners import DEFAULT_LEARNER_SPECS, LEARNERS, make_learner
from .runner import build_pairs, run, write_reports, write_timeline, write_trace
from .streams import (SCHEMAS, STANDARD_REGIMES, DriftSchedule, GeneratorConfig, StreamError,
                      generate, ingest_tabular, read_keyvalue, read_schema, write_schema,
                      write_tabular)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
OUTPUT_DIR_ENV = "DRIFTKIT_OUTPUT_DIR"

EPSILON_NS = (25, 100, 200, 300, 400, 500)
EPSILON_DELTAS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)

DETECT_STATS = ("delay", "tp", "fp", "fn", "memory", "runtime", "error_rate")


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun an experiment.

    Keys in the text form: ``seed``, ``repetitions``, ``output_dir``,
    ``stream`` (a generator kind) or ``stream.path`` + ``stream.schema``,
    ``stream.total``, ``stream.noise``, ``stream.drifts`` (``;`` list),
    ``stream.zeta``, ``stream.delta_accept``, ``learners`` and ``detectors``
    (``;`` lists of specs), ``car.w_e`` ... ``car.w_r``, ``runner.cadence``,
    ``runner.workers``, ``runner.runtime_mode``, ``runner.trace_every``,
    ``runner.adapt``, and per-kind parameters ``learner.<kind>.<param>`` /
    ``detector.<kind>.<param>``.
    """

    seed: int = 1
    repetitions: int = 1
    output_dir: str = "driftkit-out"
    stream: str = "STAGGER"
    stream_path: str = ""
    stream_schema: str = ""
    total: int = 100_000
    noise: float = 0.1
    drifts: tuple[int, ...] | None = None
    zeta: int | None = None
    delta_accept: int | None = None
    learners: tuple[str, ...] = DEFAULT_LEARNER_SPECS
    detectors: tuple[str, ...] = DEFAULT_DETECTOR_SPECS
    weights: WeightVector = field(default_factory=WeightVector)
    cadence: int = 1
    workers: int = 1
    runtime_mode: str = "ms"
    trace_every: int = 1000
    adapt: bool = True
    learner_params: tuple[tuple[str, str, object], ...] = ()
    detector_params: tuple[tuple[str, str, object], ...] = ()

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.cadence < 1 or self.workers < 1 or self.trace_every < 0:
            raise ConfigError("runner.cadence and runner.workers must be >= 1, trace_every >= 0")
        if self.runtime_mode not in RUNTIME_MODES:
            raise ConfigError(f"runner.runtime_mode must be one of {RUNTIME_MODES}")
        if not self.learners:
            raise ConfigError("learners must not be empty")
        if not self.detectors:
            raise ConfigError("detectors must not be empty")
        if not self.stream_path and self.stream.upper() not in SCHEMAS:
            raise ConfigError(f"unknown stream {self.stream!r}; valid: {', '.join(SCHEMAS)}")
        if self.stream_path and not self.stream_schema:
            raise ConfigError("stream.path needs stream.schema")
        for spec in self.learners:
            _check_kind(spec, LEARNERS, "learner")
        for spec in self.detectors:
            _check_kind(spec, DETECTORS, "detector")
        for kind, _, _ in self.learner_params:
            _check_kind(kind, LEARNERS, "learner")
        for kind, _, _ in self.detector_params:
            _check_kind(kind, DETECTORS, "detector")

    # -- text form ----------------------------------------------------------

    def to_items(self) -> list[tuple[str, str]]:
        items = [("seed", str(self.seed)), ("repetitions", str(self.repetitions)),
                 ("output_dir", self.output_dir)]
        if self.stream_path:
            items += [("stream.path", self.stream_path), ("stream.schema", self.stream_schema)]
        else:
            items.append(("stream", self.stream))
        items += [("stream.total", str(self.total)), ("stream.noise", format_param(self.noise))]
        if self.drifts is not None:
            items.append(("stream.drifts", ";".join(map(str, self.drifts))))
        if self.zeta is not None:
            items.append(("stream.zeta", str(self.zeta)))
        if self.delta_accept is not None:
            items.append(("stream.delta_accept", str(self.delta_accept)))
        items += [("learners", ";".join(self.learners)), ("detectors", ";".join(self.detectors))]
        items += [(f"car.{k}", format_param(v)) for k, v in zip(WEIGHT_KEYS, _weights(self))]
        items += [("runner.cadence", str(self.cadence)), ("runner.workers", str(self.workers)),
                  ("runner.runtime_mode", self.runtime_mode),
                  ("runner.trace_every", str(self.trace_every)),
                  ("runner.adapt", str(self.adapt).lower())]
        items += [(f"learner.{k}.{p}", format_param(v)) for k, p, v in self.learner_params]
        items += [(f"detector.{k}.{p}", format_param(v)) for k, p, v in self.detector_params]
        return items

    def to_lines(self) -> list[str]:
        return [f"{k} = {v}" for k, v in self.to_items()]

    @classmethod
    def from_mapping(cls, entries: dict[str, str]) -> "ExperimentConfig":
        kw: dict = {}
        weights = dict(zip(WEIGHT_KEYS, _weights(cls())))
        lp, dp = {}, {}
        try:
            for key, raw in entries.items():
                value = raw.strip()
                if key in ("seed", "repetitions"):
                    kw[key] = int(value)
                elif key == "output_dir":
                    kw[key] = value
                elif key == "stream":
                    kw["stream"] = value
                elif key == "stream.path":
                    kw["stream_path"] = value
                elif key == "stream.schema":
                    kw["stream_schema"] = value
                elif key == "stream.total":
                    kw["total"] = int(value)
                elif key == "stream.noise":
                    kw["noise"] = float(value)
                elif key == "stream.drifts":
                    kw["drifts"] = tuple(int(v) for v in value.split(";") if v.strip())
                elif key == "stream.zeta":
                    kw["zeta"] = int(value)
                elif key == "stream.delta_accept":
                    kw["delta_accept"] = int(value)
                elif key in ("learners", "detectors"):
                    kw[key] = tuple(s.strip() for s in value.split(";") if s.strip())
                elif key == "car.weights":
                    weights.update(zip(WEIGHT_KEYS, astuple_weights(WeightVector.parse(value))))
                elif key.startswith("car.") and key[4:] in WEIGHT_KEYS:
                    weights[key[4:]] = float(value)
                elif key == "runner.cadence":
                    kw["cadence"] = int(value)
                elif key == "runner.workers":
                    kw["workers"] = int(value)
                elif key == "runner.runtime_mode":
                    kw["runtime_mode"] = value
                elif key == "runner.trace_every":
                    kw["trace_every"] = int(value)
                elif key == "runner.adapt":
                    if value.lower() not in ("true", "false"):
                        raise ConfigError(f"runner.adapt must be true or false, got {value!r}")
                    kw["adapt"] = value.lower() == "true"
                elif key.startswith(("learner.", "detector.")) and key.count(".") == 2:
                    scope, kind, param = key.split(".")
                    (lp if scope == "learner" else dp)[(kind, param)] = parse_value(value)
                else:
                    raise ConfigError(f"unknown config key {key!r}")
            kw["weights"] = WeightVector(**weights)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        kw["learner_params"] = tuple((k, p, v) for (k, p), v in lp.items())
        kw["detector_params"] = tuple((k, p, v) for (k, p), v in dp.items())
        return cls(**kw)

    # -- derived objects -----------------------------------------------------

    def params_for(self, scope: str) -> dict[str, dict]:
        out: dict[str, dict] = {}
        source = self.learner_params if scope == "learner" else self.detector_params
        for kind, param, value in source:
            out.setdefault(kind.lower(), {})[param] = value
        return out

    def generator(self, seed: int) -> GeneratorConfig:
        kind = self.stream.upper()
        period, zeta, delta = STANDARD_REGIMES[kind]
        zeta = self.zeta if self.zeta is not None else zeta
        delta = self.delta_accept if self.delta_accept is not None else delta
        if self.drifts is not None:
            schedule = DriftSchedule(self.drifts, zeta, delta)
        else:
            schedule = DriftSchedule.every(period, self.total, zeta, delta)
        return GeneratorConfig(kind, self.total, self.noise, seed, schedule)

    def open_stream(self, seed: int):
        """``(schema, schedule, instance iterator)`` for repetition seed ``seed``."""
        if self.stream_path:
            schema = read_schema(self.stream_schema)
            schedule = DriftSchedule(self.drifts or (), self.zeta or 0,
                                     self.delta_accept if self.delta_accept is not None else 250)
            return schema, schedule, ingest_tabular(self.stream_path, schema)
        gen = self.generator(seed)
        return gen.schema, gen.schedule, generate(gen)


def astuple_weights(w: WeightVector) -> tuple[float, ...]:
    return tuple(getattr(w, f.name) for f in fields(w))


def _weights(cfg: ExperimentConfig) -> tuple[float, ...]:
    return astuple_weights(cfg.weights)


def _check_kind(spec: str, registry: dict, what: str) -> None:
    try:
        kind, _ = parse_spec(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if kind.lower() not in {k.lower() for k in registry}:
        raise ConfigError(f"unknown {what} {kind!r}; valid kinds: {', '.join(registry)}")


def parse_overrides(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override must look like key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | None, overrides: dict[str, str]) -> ExperimentConfig:
    entries: dict[str, str] = {}
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            entries = read_keyvalue(path)
        except (OSError, StreamError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
    entries.update(overrides)
    return ExperimentConfig.from_mapping(entries)


def header_lines(command: str, cfg: ExperimentConfig) -> list[str]:
    return [f"driftkit {__version__} {command}"] + cfg.to_lines()


def read_header(path: str | Path) -> ExperimentConfig:
    """Re-parse the configuration echoed at the top of an output file."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        first = True
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if first:
                first = False
                continue
            key, _, value = body.partition("=")
            entries[key.strip()] = value.strip()
    return ExperimentConfig.from_mapping(entries)


def output_dir(cfg: ExperimentConfig) -> Path:
    path = Path(os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands

def epsilon_rows(ns: Sequence[int], deltas: Sequence[float]) -> list[list[str]]:
    rows = [["n"] + [format_param(d) for d in deltas]]
    for n in ns:
        rows.append([str(n)] + [f"{fhddm_epsilon(n, d):.5f}" for d in deltas])
    return rows


def cmd_epsilon_table(args) -> int:
    ns = [int(v) for v in args.n.split(",")]
    deltas = [float(v) for v in args.delta.split(",")]
    try:
        rows = epsilon_rows(ns, deltas)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        csv.writer(out, lineterminator="\n").writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = ExperimentConfig(stream=args.stream, seed=args.seed, total=args.total, noise=args.noise)
    gen = cfg.generator(args.seed)
    n = write_tabular(generate(gen), args.out, gen.schema)
    schema_path = args.schema or str(Path(args.out).with_suffix(".schema"))
    write_schema(gen.schema, schema_path)
    print(f"wrote {n} instances to {args.out} (schema {schema_path}, "
          f"drifts {';'.join(map(str, gen.schedule.drift_locations))})")
    return EXIT_OK


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    return mean, statistics.stdev(values) if len(values) > 1 else 0.0


def detect_rows(cfg: ExperimentConfig) -> list[dict]:
    """Repeat every (learner, detector) pair ``cfg.repetitions`` times; one summary row each."""
    lp, dp = cfg.params_for("learner"), cfg.params_for("detector")
    rows = []
    for l_spec in cfg.learners:
        for d_spec in cfg.detectors:
            samples = {k: [] for k in DETECT_STATS}
            pair_name = None
            for r in range(cfg.repetitions):
                seed = cfg.seed + r
                schema, schedule, stream = cfg.open_stream(seed)
                learner = make_learner(l_spec, schema, **lp.get(parse_spec(l_spec)[0].lower(), {}))
                detector = _detector_for(d_spec, dp, seed)
                pair_name = (learner.name, detector.name)
                res = prequential_run(stream, learner, detector, schedule, cfg.runtime_mode,
                                      cfg.adapt)
                s = res.score
                for k, v in zip(DETECT_STATS, (s.mean_delay, s.tp, s.fp, s.fn, res.meter.memory_cost,
                                               res.meter.detection_runtime, 100 * res.error_rate)):
                    samples[k].append(float(v))
            row = {"learner": pair_name[0], "detector": pair_name[1], "repetitions": cfg.repetitions}
            for k in DETECT_STATS:
                row[f"{k}_mean"], row[f"{k}_std"] = _mean_std(samples[k])
            rows.append(row)
    return rows


def _detector_for(spec: str, params: dict, seed: int):
    kind, given = parse_spec(spec)
    extra = dict(params.get(kind.lower(), {}))
    # randomised detectors draw from the repetition seed unless pinned
    if kind.lower() == "seqdrift2" and "seed" not in given and "seed" not in extra:
        extra["seed"] = seed
    return make_detector(spec, **extra)


DETECT_COLUMNS = ["learner", "detector", "repetitions"] + [
    f"{k}_{s}" for k in DETECT_STATS for s in ("mean", "std")]


def cmd_detect(args) -> int:
    cfg = _config_from_args(args)
    rows = detect_rows(cfg)
    path = Path(args.out) if args.out else output_dir(cfg) / f"detect_{_stream_tag(cfg)}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_lines("detect", cfg):
            fh.write(f"# {line}\n")
        w = csv.DictWriter(fh, DETECT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    for row in rows:
        print(f"{row['learner']:>6} {row['detector']:<60} "
              + "  ".join(f"{k}={row[k + '_mean']:.2f}±{row[k + '_std']:.2f}" for k in DETECT_STATS))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_tornado(args) -> int:
    cfg = _config_from_args(args)
    out = output_dir(cfg)
    lp, dp = cfg.params_for("learner"), cfg.params_for("detector")
    for r in range(cfg.repetitions):
        seed = cfg.seed + r
        schema, schedule, stream = cfg.open_stream(seed)
        pinned = "seed" in dp.get("seqdrift2", {}) or any("seed=" in d for d in cfg.detectors)
        if not pinned:
            dp = {**dp, "seqdrift2": {**dp.get("seqdrift2", {}), "seed": seed}}
        pairs = build_pairs(cfg.learners, cfg.detectors, schema, schedule, cfg.runtime_mode,
                            cfg.adapt, lp, dp)
        outcome = run(stream, pairs, cfg.weights, cadence=cfg.cadence, workers=cfg.workers,
                      trace_every=cfg.trace_every or None)
        suffix = f"_rep{r}" if cfg.repetitions > 1 else ""
        header = header_lines(f"tornado rep={r} seed={seed}", cfg)
        write_timeline(outcome.timeline, out / f"timeline{suffix}.csv", header)
        write_reports(outcome.reports, out / f"report{suffix}.csv", header)
        if cfg.trace_every:
            write_trace(outcome.trace, out / f"scores{suffix}.csv", header)
        best = outcome.reports[outcome.scoreboard.recommended]
        print(f"seed {seed}: recommended {best.pair_id} (score {best.score:.4f}, "
              f"error-rate {100 * best.result.error_rate:.2f}%) -> {out}")
    return EXIT_OK


def _stream_tag(cfg: ExperimentConfig) -> str:
    return Path(cfg.stream_path).stem if cfg.stream_path else cfg.stream.upper()


def _config_from_args(args) -> ExperimentConfig:
    overrides = parse_overrides(args.set or [])
    for attr, key in (("stream", "stream"), ("seed", "seed"), ("reps", "repetitions"),
                      ("total", "stream.total"), ("runtime_mode", "runner.runtime_mode"),
                      ("workers", "runner.workers"), ("weights", "car.weights")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = str(value)
    for attr, key in (("learner", "learners"), ("detector", "detectors")):
        value = getattr(args, attr, None)
        if value:
            overrides[key] = ";".join(value)
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="driftkit", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"driftkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("epsilon-table", help="grid of FHDDM thresholds")
    e.add_argument("--n", default=",".join(map(str, EPSILON_NS)))
    e.add_argument("--delta", default=",".join(format_param(d) for d in EPSILON_DELTAS))
    e.add_argument("--out")
    e.set_defaults(func=cmd_epsilon_table)

    g = sub.add_parser("gen", help="materialise a synthetic stream as CSV plus schema sidecar")
    g.add_argument("stream", choices=sorted(SCHEMAS), type=str.upper)
    g.add_argument("--out", required=True)
    g.add_argument("--schema")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--total", type=int, default=100_000)
    g.add_argument("--noise", type=float, default=0.1)
    g.set_defaults(func=cmd_gen)

    for name, func, helptext in (("detect", cmd_detect, "repeat pairs and summarise drift scores"),
                                 ("tornado", cmd_tornado, "run all pairs and track the CAR leader")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="key = value experiment file")
        s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one key")
        s.add_argument("--stream")
        s.add_argument("--seed", type=int)
        s.add_argument("--total", type=int)
        s.add_argument("--runtime-mode", choices=RUNTIME_MODES)
        s.add_argument("--learner", action="append", help="learner spec (repeatable)")
        s.add_argument("--detector", action="append", help="detector spec (repeatable)")
        if name == "detect":
            s.add_argument("--reps", type=int)
            s.add_argument("--out")
        else:
            s.add_argument("--workers", type=int)
            s.add_argument("--weights", help='six weights, e.g. "3 0 1.5 1 2 2"')
        s.set_defaults(func=func)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"driftkit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StreamError, RuntimeError, OSError, ValueError) as exc:
        print(f"driftkit: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
