"""Synthetic drift streams, tabular ingestion and label-shift drift synthesis.

Every generator draws from :class:`random.Random` (MT19937) seeded with the
config seed, so a ``(config, seed)`` pair always yields the same sequence.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

NUMERIC = "numeric"
NOMINAL = "nominal"

BINARY_CLASSES = ("positive", "negative")

# sigmoid arguments beyond this are exactly 0/1 in double precision
_SIGMOID_CLAMP = 40.0


class StreamError(ValueError):
    """Invalid stream configuration or malformed stream data."""


class SchemaMismatch(StreamError):
    """An instance or file does not agree with the declared schema."""


class TabularFormatError(StreamError):
    def __init__(self, message: str, line: int, column: str | None = None):
        where = f"line {line}" + (f", column {column!r}" if column else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str = NUMERIC
    domain: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, NOMINAL):
            raise StreamError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == NOMINAL and not self.domain:
            raise StreamError(f"nominal attribute {self.name!r} needs a domain")

    @property
    def nominal(self) -> bool:
        return self.kind == NOMINAL


@dataclass(frozen=True)
class StreamSchema:
    attributes: tuple[Attribute, ...]
    classes: tuple[str, ...]

    def __post_init__(self):
        if not self.attributes:
            raise StreamError("schema needs at least one attribute")
        if len(self.classes) < 2:
            raise StreamError("schema needs at least two classes")
        if len(set(self.classes)) != len(self.classes):
            raise StreamError("duplicate class labels")

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def validate(self, instance: "Instance") -> None:
        if len(instance.features) != self.arity:
            raise SchemaMismatch(
                f"expected {self.arity} features, got {len(instance.features)}")
        for attr, value in zip(self.attributes, instance.features):
            if attr.nominal:
                if value not in attr.domain:
                    raise SchemaMismatch(f"{attr.name}: {value!r} not in {attr.domain}")
            elif isinstance(value, str):
                raise SchemaMismatch(f"{attr.name}: expected a number, got {value!r}")
        if instance.label not in self.classes:
            raise SchemaMismatch(f"label {instance.label!r} not in {self.classes}")


class Instance(NamedTuple):
    features: tuple
    label: str


@dataclass(frozen=True)
class DriftSchedule:
    """Ground-truth drift points, transition length and acceptable delay."""

    drift_locations: tuple[int, ...]
    zeta: int = 50
    delta_accept: int = 250

    def __post_init__(self):
        locs = tuple(int(t) for t in self.drift_locations)
        object.__setattr__(self, "drift_locations", locs)
        if self.zeta < 0 or self.delta_accept < 0:
            raise StreamError("zeta and delta_accept must be >= 0")
        for a, b in zip(locs, locs[1:]):
            if b <= a:
                raise StreamError("drift locations must be strictly increasing")
            if b - a <= self.zeta:
                raise StreamError("gap between drift points must exceed zeta")
        if locs and locs[0] < 0:
            raise StreamError("drift locations must be non-negative")

    @classmethod
    def every(cls, period: int, total: int, zeta: int = 50, delta_accept: int = 250):
        return cls(tuple(range(period, total, period)), zeta, delta_accept)

    def transition_center(self, drift: int) -> float:
        """Sigmoid midpoint: the transition band starts at the drift point."""
        return self.drift_locations[drift] + self.zeta / 2.0

    def transition_probability(self, drift: int, t: int) -> float:
        """Probability that instance ``t`` already follows the concept after drift ``drift``.

        ``1 / (1 + exp(-4 (t - c) / zeta))`` with ``c = t0 + zeta / 2``.
        """
        if self.zeta == 0:
            return 1.0 if t >= self.drift_locations[drift] else 0.0
        z = 4.0 * (t - self.transition_center(drift)) / self.zeta
        if z > _SIGMOID_CLAMP:
            return 1.0
        if z < -_SIGMOID_CLAMP:
            return 0.0
        return 1.0 / (1.0 + math.exp(-z))

    def sample_context(self, t: int, u: float) -> int:
        """Context index for instance ``t`` given one uniform draw ``u``.

        P(context > j) equals the transition probability of drift j; the
        probabilities fall with j, so counting them is a valid coupling.
        """
        context = 0
        for j in range(len(self.drift_locations)):
            if u < self.transition_probability(j, t):
                context = j + 1
            else:
                break
        return context

    def context_of(self, t: int) -> int:
        """Nominal context (ignoring the transition band)."""
        return sum(1 for t0 in self.drift_locations if t >= t0)


# ---------------------------------------------------------------------------
# classification functions


def _check_unit(**values):
    for name, v in values.items():
        if not 0.0 <= v <= 1.0:
            raise StreamError(f"{name}={v} outside [0, 1]")


def _check_context(context):
    if context < 0:
        raise StreamError(f"context must be >= 0, got {context}")


def _flip(positive: bool, context: int) -> str:
    if context % 2:
        positive = not positive
    return BINARY_CLASSES[0] if positive else BINARY_CLASSES[1]


def classify_sine1(x: float, y: float, context: int) -> str:
    _check_unit(x=x, y=y)
    _check_context(context)
    return _flip(y < math.sin(x), context)


def _sine2_under(x, y):
    return y < 0.5 + 0.3 * math.sin(3.0 * math.pi * x)


def classify_sine2(x: float, y: float, context: int) -> str:
    _check_unit(x=x, y=y)
    _check_context(context)
    return _flip(_sine2_under(x, y), context)


def classify_mixed(x: float, y: float, v: bool, w: bool, context: int) -> str:
    _check_unit(x=x, y=y)
    _check_context(context)
    held = int(bool(v)) + int(bool(w)) + int(_sine2_under(x, y))
    return _flip(held >= 2, context)


STAGGER_DOMAINS = {
    "size": ("small", "medium", "large"),
    "color": ("red", "green"),
    "shape": ("circular", "non-circular"),
}


def classify_stagger(size: str, color: str, shape: str, context: int) -> str:
    for name, value in (("size", size), ("color", color), ("shape", shape)):
        if value not in STAGGER_DOMAINS[name]:
            raise StreamError(f"unknown {name} {value!r}")
    _check_context(context)
    rule = context % 3
    if rule == 0:
        positive = color == "red" and size == "small"
    elif rule == 1:
        positive = color == "green" or shape == "circular"
    else:
        positive = size in ("medium", "large")
    return BINARY_CLASSES[0] if positive else BINARY_CLASSES[1]


# ((center_x, center_y), radius), cycled per context
CIRCLES = (
    ((0.2, 0.5), 0.15),
    ((0.4, 0.5), 0.2),
    ((0.6, 0.5), 0.25),
    ((0.8, 0.5), 0.3),
)


def classify_circles(x: float, y: float, context: int) -> str:
    _check_unit(x=x, y=y)
    _check_context(context)
    (cx, cy), r = CIRCLES[context % len(CIRCLES)]
    inside = (x - cx) ** 2 + (y - cy) ** 2 < r * r
    return BINARY_CLASSES[0] if inside else BINARY_CLASSES[1]


# seven-segment encoding, segments ordered top, top-left, top-right, middle,
# bottom-left, bottom-right, bottom
LED_SEGMENTS = (
    (1, 1, 1, 0, 1, 1, 1),
    (0, 0, 1, 0, 0, 1, 0),
    (1, 0, 1, 1, 1, 0, 1),
    (1, 0, 1, 1, 0, 1, 1),
    (0, 1, 1, 1, 0, 1, 0),
    (1, 1, 0, 1, 0, 1, 1),
    (1, 1, 0, 1, 1, 1, 1),
    (1, 0, 1, 0, 0, 1, 0),
    (1, 1, 1, 1, 1, 1, 1),
    (1, 1, 1, 1, 0, 1, 1),
)
LED_RELEVANT = 7
LED_IRRELEVANT = 17
LED_CLASSES = tuple(str(d) for d in range(10))

_led_cache: dict[tuple[int, int], tuple[int, ...]] = {}


def led_positions(context: int, swaps: int = 3) -> tuple[int, ...]:
    """Output position of each raw attribute (7 segments, then 17 noise bits).

    Drift k swaps ``swaps`` segment slots with irrelevant slots, on top of the
    placement of context k-1.
    """
    _check_context(context)
    key = (context, swaps)
    if key not in _led_cache:
        pos = list(range(LED_RELEVANT + LED_IRRELEVANT))
        for k in range(1, context + 1):
            for j in range(swaps):
                a = (swaps * (k - 1) + j) % LED_RELEVANT
                b = LED_RELEVANT + (swaps * (k - 1) + j) % LED_IRRELEVANT
                pos[a], pos[b] = pos[b], pos[a]
        _led_cache[key] = tuple(pos)
    return _led_cache[key]


def generate_led(context: int, rng: random.Random, swaps: int = 3,
                 digit: int | None = None) -> Instance:
    if digit is None:
        digit = rng.randrange(10)
    raw = LED_SEGMENTS[digit] + tuple(rng.getrandbits(1) for _ in range(LED_IRRELEVANT))
    out = [0] * len(raw)
    for i, p in enumerate(led_positions(context, swaps)):
        out[p] = raw[i]
    return Instance(tuple(str(b) for b in out), LED_CLASSES[digit])


# ---------------------------------------------------------------------------
# generators

_BOOL = ("false", "true")

SCHEMAS = {
    "SINE1": StreamSchema((Attribute("x"), Attribute("y")), BINARY_CLASSES),
    "SINE2": StreamSchema((Attribute("x"), Attribute("y")), BINARY_CLASSES),
    "MIXED": StreamSchema(
        (Attribute("v", NOMINAL, _BOOL), Attribute("w", NOMINAL, _BOOL),
         Attribute("x"), Attribute("y")), BINARY_CLASSES),
    "STAGGER": StreamSchema(
        tuple(Attribute(n, NOMINAL, d) for n, d in STAGGER_DOMAINS.items()),
        BINARY_CLASSES),
    "CIRCLES": StreamSchema((Attribute("x"), Attribute("y")), BINARY_CLASSES),
    "LED": StreamSchema(
        tuple(Attribute(f"a{i}", NOMINAL, ("0", "1")) for i in range(24)),
        LED_CLASSES),
}

# (drift period, zeta, acceptable delay) of the standard 100k-instance regime
STANDARD_REGIMES = {
    "SINE1": (20_000, 50, 250),
    "SINE2": (20_000, 50, 250),
    "MIXED": (20_000, 50, 250),
    "STAGGER": (33_333, 50, 250),
    "CIRCLES": (25_000, 500, 1000),
    "LED": (25_000, 500, 1000),
}


@dataclass(frozen=True)
class GeneratorConfig:
    kind: str
    total: int = 100_000
    noise: float = 0.1
    seed: int = 1
    schedule: DriftSchedule = field(default_factory=lambda: DriftSchedule(()))
    led_swaps: int = 3

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in SCHEMAS:
            raise StreamError(f"unknown stream kind {self.kind!r}; valid: {sorted(SCHEMAS)}")
        if not 0.0 <= self.noise <= 1.0:
            raise StreamError(f"noise probability {self.noise} outside [0, 1]")
        if self.total < 0:
            raise StreamError("total must be >= 0")
        locs = self.schedule.drift_locations
        if locs and locs[-1] > self.total:
            raise StreamError("last drift location lies beyond the stream end")

    @classmethod
    def standard(cls, kind: str, seed: int = 1, noise: float = 0.1,
                 total: int = 100_000) -> "GeneratorConfig":
        """The 100k-instance regime used for the synthetic benchmarks."""
        period, zeta, delta = STANDARD_REGIMES[kind.upper()]
        return cls(kind, total, noise, seed, DriftSchedule.every(period, total, zeta, delta))

    @property
    def schema(self) -> StreamSchema:
        return SCHEMAS[self.kind]


def _sampler(config: GeneratorConfig):
    """Return ``sample(rng, context) -> (features, clean_label)`` for the stream kind."""
    kind = config.kind
    pos, neg = BINARY_CLASSES
    sin = math.sin
    three_pi = 3.0 * math.pi

    if kind == "SINE1":
        def sample(rng, context):
            x, y = rng.random(), rng.random()
            positive = (y < sin(x)) != bool(context & 1)
            return (x, y), pos if positive else neg
    elif kind == "SINE2":
        def sample(rng, context):
            x, y = rng.random(), rng.random()
            positive = (y < 0.5 + 0.3 * sin(three_pi * x)) != bool(context & 1)
            return (x, y), pos if positive else neg
    elif kind == "MIXED":
        def sample(rng, context):
            v, w = rng.getrandbits(1), rng.getrandbits(1)
            x, y = rng.random(), rng.random()
            held = v + w + (y < 0.5 + 0.3 * sin(three_pi * x))
            positive = (held >= 2) != bool(context & 1)
            return (_BOOL[v], _BOOL[w], x, y), pos if positive else neg
    elif kind == "STAGGER":
        sizes, colors, shapes = STAGGER_DOMAINS.values()

        def sample(rng, context):
            f = (sizes[rng.randrange(3)], colors[rng.randrange(2)], shapes[rng.randrange(2)])
            return f, classify_stagger(*f, context)
    elif kind == "CIRCLES":
        def sample(rng, context):
            x, y = rng.random(), rng.random()
            (cx, cy), r = CIRCLES[context % len(CIRCLES)]
            inside = (x - cx) ** 2 + (y - cy) ** 2 < r * r
            return (x, y), pos if inside else neg
    else:
        swaps = config.led_swaps

        def sample(rng, context):
            inst = generate_led(context, rng, swaps)
            return inst.features, inst.label
    return sample


def generate(config: GeneratorConfig) -> Iterator[Instance]:
    """Lazily generate ``config.total`` instances.

    Per instance the draws are: concept choice, attributes, noise decision,
    and (multiclass only) the replacement label.
    """
    rng = random.Random(config.seed)
    sample = _sampler(config)
    schedule = config.schedule
    classes = config.schema.classes
    k = len(classes)
    index_of = {c: i for i, c in enumerate(classes)}
    noise = config.noise
    locs = schedule.drift_locations
    band = (_SIGMOID_CLAMP * schedule.zeta / 4.0) if schedule.zeta else 0.0
    centers = [schedule.transition_center(j) for j in range(len(locs))]
    for t in range(config.total):
        u = rng.random()
        # skip the sigmoid away from every transition band
        nominal = 0
        near = False
        for t0 in centers:
            if t >= t0 + band + 1:
                nominal += 1
            elif t > t0 - band - 1:
                near = True
                break
            else:
                break
        context = schedule.sample_context(t, u) if near else nominal
        features, label = sample(rng, context)
        if noise and rng.random() < noise:
            if k == 2:
                label = classes[1 - index_of[label]]
            else:
                j = rng.randrange(k - 1)
                if j >= index_of[label]:
                    j += 1
                label = classes[j]
        yield Instance(features, label)


def clean_label(config: GeneratorConfig, features: tuple, context: int) -> str:
    """Noise-free label of ``features`` under ``context`` (test oracle helper)."""
    kind = config.kind
    if kind == "SINE1":
        return classify_sine1(*features, context)
    if kind == "SINE2":
        return classify_sine2(*features, context)
    if kind == "MIXED":
        v, w, x, y = features
        return classify_mixed(x, y, v == "true", w == "true", context)
    if kind == "STAGGER":
        return classify_stagger(*features, context)
    if kind == "CIRCLES":
        return classify_circles(*features, context)
    pos = led_positions(context, config.led_swaps)
    segs = tuple(int(features[pos[i]]) for i in range(LED_RELEVANT))
    return LED_CLASSES[LED_SEGMENTS.index(segs)] if segs in LED_SEGMENTS else ""


# ---------------------------------------------------------------------------
# tabular files


def read_schema(path: str | Path) -> StreamSchema:
    """Parse a flat ``key = value`` schema sidecar.

    Keys: ``attributes`` (comma list, in column order), ``attr.<name>``
    (``numeric`` or ``nominal:a|b|c``), ``classes`` (``|`` list).
    """
    entries = read_keyvalue(path)
    try:
        names = [n.strip() for n in entries["attributes"].split(",") if n.strip()]
        classes = tuple(c.strip() for c in entries["classes"].split("|"))
    except KeyError as exc:
        raise StreamError(f"{path}: missing key {exc.args[0]!r}") from None
    attrs = []
    for name in names:
        spec = entries.get(f"attr.{name}", NUMERIC)
        if spec.startswith(NOMINAL):
            _, _, dom = spec.partition(":")
            attrs.append(Attribute(name, NOMINAL, tuple(d.strip() for d in dom.split("|"))))
        elif spec == NUMERIC:
            attrs.append(Attribute(name))
        else:
            raise StreamError(f"{path}: bad attribute spec {spec!r} for {name!r}")
    return StreamSchema(tuple(attrs), classes)


def write_schema(schema: StreamSchema, path: str | Path) -> None:
    lines = ["attributes = " + ",".join(a.name for a in schema.attributes)]
    for a in schema.attributes:
        lines.append(f"attr.{a.name} = " + (f"nominal:{'|'.join(a.domain)}" if a.nominal else NUMERIC))
    lines.append("classes = " + "|".join(schema.classes))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_keyvalue(path: str | Path) -> dict[str, str]:
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise StreamError(f"{path}:{lineno}: expected key = value")
            entries[key.strip()] = value.strip()
    return entries


LABEL_COLUMN = "class"


def ingest_tabular(path: str | Path, schema: StreamSchema, delimiter: str = ",") -> Iterator[Instance]:
    """Lazily read delimiter-separated rows (header first, label last)."""
    expected = [a.name for a in schema.attributes] + [LABEL_COLUMN]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            return
        header = [h.strip() for h in header]
        if header != expected:
            raise SchemaMismatch(f"{path}: header {header} does not match schema {expected}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(expected):
                raise TabularFormatError(f"expected {len(expected)} fields, got {len(row)}", line)
            features = []
            for attr, raw in zip(schema.attributes, row):
                raw = raw.strip()
                if attr.nominal:
                    if raw not in attr.domain:
                        raise TabularFormatError(f"unknown nominal value {raw!r}", line, attr.name)
                    features.append(raw)
                else:
                    try:
                        features.append(float(raw))
                    except ValueError:
                        raise TabularFormatError(f"not a number: {raw!r}", line, attr.name) from None
            label = row[-1].strip()
            if label not in schema.classes:
                raise TabularFormatError(f"unknown class {label!r}", line, LABEL_COLUMN)
            yield Instance(tuple(features), label)


def write_tabular(instances: Iterable[Instance], path: str | Path, schema: StreamSchema,
                  delimiter: str = ",") -> int:
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow([a.name for a in schema.attributes] + [LABEL_COLUMN])
        for inst in instances:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in inst.features]
                            + [inst.label])
            n += 1
    return n


# ---------------------------------------------------------------------------
# label-shift drift for static data


def replay(rows: Sequence[Instance], times: int) -> Iterator[Instance]:
    """Concatenate ``times`` passes over a static dataset."""
    return itertools.chain.from_iterable(itertools.repeat(rows, times))


def rotate_label(label: str, classes: Sequence[str], context: int) -> str:
    return classes[(classes.index(label) + context) % len(classes)]


def synthesize_label_shift(stream: Iterable[Instance], schedule: DriftSchedule,
                           rng: random.Random, classes: Sequence[str]) -> Iterator[Instance]:
    """Rotate labels by the context index, with sigmoid transitions at drift points."""
    classes = tuple(classes)
    for t, inst in enumerate(stream):
        context = schedule.sample_context(t, rng.random())
        if context % len(classes):
            inst = Instance(inst.features, rotate_label(inst.label, classes, context))
        yield inst
