"""Drift detectors behind one ``step(bit) -> Verdict`` contract."""

from __future__ import annotations

from .base import DRIFT, STABLE, WARNING, Detector, Verdict
from .fhddm import FHDDM, FHDDMS, BitWindow, FHDDMSAdd, fhddm_epsilon
from .hddm import HDDM_A, HDDM_W
from .sequential import CUSUM, DDM, EDDM, PageHinkley
from .windows import ADWIN, SeqDrift2

DETECTORS: dict[str, type[Detector]] = {
    cls.kind: cls
    for cls in (FHDDM, FHDDMS, FHDDMSAdd, CUSUM, PageHinkley, DDM, EDDM,
                HDDM_A, HDDM_W, ADWIN, SeqDrift2)
}

# the twelve configurations benchmarked side by side
DEFAULT_DETECTOR_SPECS = (
    "FHDDMS_add", "FHDDMS", "FHDDM(n=25)", "FHDDM(n=100)", "CUSUM", "PH", "DDM", "EDDM",
    "ADWIN", "SeqDrift2", "HDDM_A", "HDDM_W",
)


def parse_value(text: str):
    """``true``/``false``, int, float, else the stripped string."""
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_spec(spec: str) -> tuple[str, dict]:
    """Split ``"KIND(a=1,b=2)"`` into ``("KIND", {"a": 1, "b": 2})``."""
    spec = spec.strip()
    kind, _, rest = spec.partition("(")
    params = {}
    if rest:
        if not rest.endswith(")"):
            raise ValueError(f"malformed spec {spec!r}")
        for item in filter(None, (p.strip() for p in rest[:-1].split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed parameter {item!r} in {spec!r}")
            params[key.strip()] = parse_value(value)
    return kind.strip(), params


def make_detector(spec: str, **overrides) -> Detector:
    kind, params = parse_spec(spec)
    lookup = {k.lower(): v for k, v in DETECTORS.items()}
    try:
        cls = lookup[kind.lower()]
    except KeyError:
        raise KeyError(f"unknown detector {kind!r}; valid kinds: {', '.join(DETECTORS)}") from None
    params.update(overrides)
    return cls(**params)


__all__ = [
    "ADWIN", "BitWindow", "CUSUM", "DDM", "DEFAULT_DETECTOR_SPECS", "DETECTORS", "DRIFT",
    "Detector", "EDDM", "FHDDM", "FHDDMS", "FHDDMSAdd", "HDDM_A", "HDDM_W", "PageHinkley",
    "STABLE", "SeqDrift2", "Verdict", "WARNING", "fhddm_epsilon", "make_detector", "parse_spec",
    "parse_value",
]
