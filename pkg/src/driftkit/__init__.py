"""Concept-drift detection with sliding Hoeffding windows, prequential evaluation,
and CAR-based recommendation of (classifier, detector) pairs."""

__version__ = "0.1.0"

from .car import MeasurementRow, ScoreBoard, WeightVector, car_scores, normalize, recommend
from .detectors import DRIFT, STABLE, WARNING, Detector, Verdict, fhddm_epsilon, make_detector
from .evaluation import DriftScore, ResourceMeter, prequential_run, score_alarms
from .learners import Learner, make_learner
from .runner import build_pairs, replay, run
from .streams import DriftSchedule, GeneratorConfig, Instance, StreamSchema, generate

__all__ = [
    "DRIFT", "Detector", "DriftSchedule", "DriftScore", "GeneratorConfig", "Instance", "Learner",
    "MeasurementRow", "ResourceMeter", "STABLE", "ScoreBoard", "StreamSchema", "Verdict",
    "WARNING", "WeightVector", "build_pairs", "car_scores", "fhddm_epsilon", "generate",
    "make_detector", "make_learner", "normalize", "prequential_run", "recommend", "replay",
    "run", "score_alarms",
]
