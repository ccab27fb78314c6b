"""End-to-end acceptance checks, one test per criterion.

Each test attaches a one-line summary; the terminal summary prints
``criterion N: PASS|FAIL  <summary>`` for every criterion that ran.
"""

import csv
import filecmp
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from driftkit.car import WeightVector, car_scores, car_values, normalize
from driftkit.cli import EXIT_OK, OUTPUT_DIR_ENV, main
from driftkit.detectors import (DEFAULT_DETECTOR_SPECS, DRIFT, FHDDM, FHDDMS, FHDDMSAdd,
                                make_detector)
from driftkit.evaluation import prequential_run
from driftkit.learners import DEFAULT_LEARNER_SPECS, NaiveBayes
from driftkit.runner import build_pairs, run, write_timeline
from driftkit.streams import GeneratorConfig, generate
from oracles import NaiveFHDDM, NaiveFHDDMS, NaiveFHDDMSAdd

SEEDS = range(1, 101)

# published epsilon values, rows n = 25..500, columns delta = 1e-3..1e-7
PUBLISHED_EPSILON = {
    25: (0.37169, 0.42919, 0.47985, 0.52565, 0.56777),
    100: (0.18585, 0.21460, 0.23993, 0.26283, 0.28388),
    200: (0.13141, 0.15174, 0.16965, 0.18585, 0.20074),
    300: (0.10730, 0.12390, 0.13852, 0.15174, 0.16390),
    400: (0.09292, 0.10730, 0.11996, 0.13141, 0.14194),
    500: (0.08311, 0.09597, 0.10730, 0.11754, 0.12696),
}


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


def sweep(kind, spec, seeds=SEEDS):
    """Prequential NB runs over the standard regime, one per seed."""
    results = []
    for seed in seeds:
        cfg = GeneratorConfig.standard(kind, seed=seed)
        results.append(prequential_run(generate(cfg), NaiveBayes(cfg.schema), make_detector(spec),
                                       cfg.schedule, runtime_mode="ops"))
    return results


def mean(values):
    return statistics.fmean(values)


# -- 1 ---------------------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_epsilon_table(tmp_path, record_property):
    out = tmp_path / "eps.csv"
    assert main(["epsilon-table", "--out", str(out)]) == EXIT_OK
    rows = read_rows(out)
    deltas = [float(d) for d in rows[0][1:]]
    assert deltas == [1e-3, 1e-4, 1e-5, 1e-6, 1e-7]
    got = {int(r[0]): tuple(float(v) for v in r[1:]) for r in rows[1:]}
    assert set(got) == set(PUBLISHED_EPSILON)
    worst = max(abs(a - b) for n, ref in PUBLISHED_EPSILON.items() for a, b in zip(got[n], ref))
    cells = sum(len(v) for v in got.values())
    record_property("detail", f"{cells} cells, max abs deviation {worst:.1e} (tol 5e-6)")
    assert cells == 30
    assert worst <= 5e-6


# -- 2 ---------------------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_stacked_worked_example(record_property):
    d = FHDDMS(n_long=20, n_short=5, delta=0.002)
    record_property("detail", f"eps_l={d.epsilon_long:.4f} eps_s={d.epsilon_short:.4f}")
    assert d.epsilon_long == pytest.approx(0.394, abs=5e-4)
    assert d.epsilon_short == pytest.approx(0.788, abs=5e-4)
    # fill the long window with ones, then feed zeros: the short drop grows by 0.2 per zero
    for _ in range(20):
        assert d.step(1) is not DRIFT
    fired = None
    for k in range(1, 6):
        verdict = d.step(0)
        drop_short = 1.0 - (5 - k) / 5
        drop_long = 1.0 - (20 - k) / 20
        assert drop_long < d.epsilon_long
        assert (verdict is DRIFT) == (drop_short >= d.epsilon_short)
        if verdict is DRIFT:
            fired = k
            break
    record_property("detail", f"eps_l={d.epsilon_long:.4f} eps_s={d.epsilon_short:.4f}, "
                              f"short-test alarm on zero #{fired}")
    assert fired == 4


# -- 3 ---------------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.criterion(3)
def test_sine1_nb_fhddm_rerun(record_property):
    results = sweep("SINE1", "FHDDM(n=100,delta=1e-7)")
    tp = mean([r.score.tp for r in results])
    fp = mean([r.score.fp for r in results])
    fn = mean([r.score.fn for r in results])
    delay = mean([r.score.mean_delay for r in results])
    error = 100 * mean([r.error_rate for r in results])
    record_property("detail", f"TP={tp:.2f} FP={fp:.2f} FN={fn:.2f} delay={delay:.2f} "
                              f"error={error:.2f}% over {len(results)} seeds")
    assert tp == 4.0
    assert fp <= 0.1 and fn <= 0.1
    assert 39 <= delay <= 59
    assert abs(error - 14.32) <= 1.0


# -- 4 ---------------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.criterion(4)
def test_circles_stacked_beats_short_window(record_property):
    stacked = sweep("CIRCLES", "FHDDMS")
    single = sweep("CIRCLES", "FHDDM(n=25)")
    d_s, d_f = (mean([r.score.mean_delay for r in rs]) for rs in (stacked, single))
    fn_s, fn_f = (mean([r.score.fn for r in rs]) for rs in (stacked, single))
    record_property("detail", f"delay FHDDMS={d_s:.2f} vs FHDDM25={d_f:.2f}; "
                              f"FN {fn_s:.2f} vs {fn_f:.2f}")
    assert d_s < d_f
    assert fn_s <= fn_f


# -- 5 ---------------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.criterion(5)
def test_stationary_false_alarm_bound(record_property):
    quiet = {"FHDDM": 0, "FHDDMS": 0}
    for seed in range(30):
        bits = (np.random.default_rng(seed).random(1_000_000) < 0.9).astype(np.int8).tolist()
        for name, det in (("FHDDM", FHDDM(100, 1e-7)), ("FHDDMS", FHDDMS(100, 25, 1e-7))):
            step = det.step
            if not any(step(b) is DRIFT for b in bits):
                quiet[name] += 1
    record_property("detail", f"alarm-free seeds of 30: FHDDM={quiet['FHDDM']} "
                              f"FHDDMS={quiet['FHDDMS']}")
    assert quiet["FHDDM"] >= 29 and quiet["FHDDMS"] >= 29


# -- 6 ---------------------------------------------------------------------------------

def drifting_bits(seed, n=10_000):
    """Accuracy alternates between high and low segments so alarms actually occur."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        p = rng.choice((0.95, 0.9, 0.6, 0.3))
        out.extend(1 if rng.random() < p else 0 for _ in range(rng.randint(50, 800)))
    return out[:n]


@pytest.mark.criterion(6)
def test_oracle_equivalence(record_property):
    alarms_seen = 0
    for seed in range(20):
        seq = drifting_bits(seed)
        pairs = [
            (FHDDM(100, 1e-3), NaiveFHDDM(100, 1e-3), lambda d: (d.mu_t,),
             lambda o: (o.mu_t,)),
            (FHDDMS(100, 25, 1e-3), NaiveFHDDMS(100, 25, 1e-3),
             lambda d: (d.mu_long, d.mu_short), lambda o: (o.mu_l, o.mu_s)),
            (FHDDMSAdd(100, 25, 1e-3), NaiveFHDDMSAdd(100, 25, 1e-3),
             lambda d: (d.mu_long, d.mu_short), lambda o: (o.mu_l, o.mu_s)),
        ]
        for real, naive, real_means, naive_means in pairs:
            got, want = [], []
            for t, b in enumerate(seq):
                if real.step(b) is DRIFT:
                    got.append(t)
                if naive.step(b):
                    want.append(t)
                assert real_means(real) == naive_means(naive), (seed, type(real).__name__, t)
            assert got == want, (seed, type(real).__name__)
            alarms_seen += len(got)
    record_property("detail", f"20 seeds x 1e4 bits, 3 detectors, {alarms_seen} identical alarms")
    assert alarms_seen > 0


# -- 7 ---------------------------------------------------------------------------------

int_weights = st.lists(st.integers(1, 50), min_size=6, max_size=6)
matrices = st.integers(2, 12).flatmap(
    lambda p: hnp.arrays(float, (p, 6), elements=st.integers(0, 10_000).map(float)))


@settings(max_examples=1000)
@given(matrices, int_weights, st.integers(1, 1000), st.integers(0, 5), st.integers(1, 64),
       st.integers(-1000, 1000), st.data())
def check_car_properties(m, ints, c, col, a_num, b, data):
    w = WeightVector(*ints)
    n = normalize(m)
    board = car_scores(n, w)
    # Score = 1 - CAR, both in [0, 1]
    assert np.array_equal(board.score, 1.0 - board.car)
    assert np.all((board.car >= 0) & (board.car <= 1))
    # weight-scale invariance
    scaled = WeightVector(*(c * i for i in ints))
    assert np.array_equal(car_values(n, w), car_values(n, scaled))
    assert car_scores(n, scaled).recommended == board.recommended
    # positive affine change of one raw column leaves the recommendation alone
    shifted = m.copy()
    shifted[:, col] = (a_num / 4) * m[:, col] + b
    assert car_scores(normalize(shifted), w).recommended == board.recommended
    # a dominating row scores strictly higher
    p = m.shape[0]
    i = data.draw(st.integers(0, p - 1))
    j = data.draw(st.integers(0, p - 1).filter(lambda x: x != i))
    strict = data.draw(st.integers(0, 5))
    dom = m.copy()
    dom[i] = np.minimum(dom[i], dom[j])
    dom[j, strict] = dom[i, strict] + data.draw(st.integers(1, 1000))
    dom_board = car_scores(normalize(dom), w)
    assert dom_board.score[i] > dom_board.score[j]


@pytest.mark.criterion(7)
def test_car_properties(record_property):
    record_property("detail", "1000 random matrices: complement, weight scale, affine, Pareto")
    check_car_properties()


# -- 8 ---------------------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_runner_worker_determinism(tmp_path, record_property):
    cfg = GeneratorConfig.standard("STAGGER", seed=7, total=4000)
    paths = []
    for workers in (1, 4):
        pairs = build_pairs(list(DEFAULT_LEARNER_SPECS), list(DEFAULT_DETECTOR_SPECS), cfg.schema,
                            cfg.schedule, runtime_mode="ops")
        out = run(generate(cfg), pairs, WeightVector(), cadence=1, workers=workers)
        path = tmp_path / f"timeline_{workers}.csv"
        write_timeline(out.timeline, path)
        paths.append(path)
    same = filecmp.cmp(*paths, shallow=False)
    record_property("detail", f"{len(pairs)} pairs, 1 vs 4 workers, timeline byte-equal={same}")
    assert same


# -- 9 ---------------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.criterion(9)
def test_tornado_stagger_sanity(tmp_path, monkeypatch, record_property):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    code = main(["tornado", "--stream", "STAGGER", "--runtime-mode", "ops",
                 "--set", "runner.trace_every=0"])
    assert code == EXIT_OK
    rows = read_rows(tmp_path / "report.csv")
    header, body = rows[0], rows[1:]
    error = [float(r[header.index("error_rate")]) for r in body]
    score = [float(r[header.index("score")]) for r in body]
    best = score.index(max(score))
    median = statistics.median(error)
    record_property("detail", f"{len(body)} pairs, recommended {body[best][0]} error "
                              f"{100 * error[best]:.2f}% vs median {100 * median:.2f}%")
    assert len(body) == 60
    assert error[best] <= median
