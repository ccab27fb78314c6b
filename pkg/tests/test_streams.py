import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from driftkit.streams import (BINARY_CLASSES, CIRCLES, LED_SEGMENTS, SCHEMAS, Attribute,
                              DriftSchedule, GeneratorConfig, Instance, SchemaMismatch,
                              StreamError, StreamSchema, TabularFormatError, classify_circles,
                              classify_mixed, classify_sine1, classify_sine2, classify_stagger,
                              clean_label, generate, generate_led, ingest_tabular, led_positions,
                              read_schema, replay, rotate_label, synthesize_label_shift,
                              write_schema, write_tabular)

POS, NEG = BINARY_CLASSES
unit = st.floats(0.0, 1.0)


# -- classification functions ------------------------------------------------

def test_sine1_examples():
    # sin(0.5) = 0.479... > 0.2
    assert math.sin(0.5) > 0.2
    assert classify_sine1(0.5, 0.2, 0) == POS
    assert classify_sine1(0.5, 0.2, 1) == NEG
    assert classify_sine1(0.0, 0.0, 0) == NEG


def test_sine2_examples():
    assert classify_sine2(0.0, 0.4, 0) == POS
    # threshold at x=1/3 is 0.5 + 0.3 sin(pi), i.e. 0.5 up to rounding; 0.49 lies under it
    assert 0.49 < 0.5 + 0.3 * math.sin(math.pi)
    assert classify_sine2(1 / 3, 0.49, 0) == POS
    assert classify_sine2(1 / 3, 0.51, 0) == NEG
    assert classify_sine2(1 / 3, 0.51, 1) == POS


def test_mixed_examples():
    for x, y in [(0.1, 0.9), (0.7, 0.05), (0.0, 0.0)]:
        assert classify_mixed(x, y, True, True, 0) == POS
    assert classify_mixed(0.0, 0.9, False, False, 0) == NEG
    assert classify_mixed(0.0, 0.9, False, False, 1) == POS


def test_stagger_examples():
    assert classify_stagger("small", "red", "circular", 0) == POS
    assert classify_stagger("small", "red", "non-circular", 1) == NEG
    assert classify_stagger("large", "red", "non-circular", 2) == POS
    # contexts cycle with period 3
    assert classify_stagger("small", "red", "non-circular", 3) == POS
    with pytest.raises(StreamError):
        classify_stagger("huge", "red", "circular", 0)


def test_circles_examples():
    for ctx, ((cx, cy), r) in enumerate(CIRCLES):
        assert classify_circles(cx, cy, ctx) == POS
        assert classify_circles(cx, cy + r - 1e-9, ctx) == POS
        assert classify_circles(cx, cy + r + 1e-9, ctx) == NEG
    # distance from origin to (0.5, 0.5) is ~0.707 > any radius
    assert classify_circles(0.0, 0.0, 1) == NEG


def test_range_checks():
    with pytest.raises(StreamError):
        classify_sine1(1.5, 0.2, 0)
    with pytest.raises(StreamError):
        classify_sine2(0.2, -0.1, 0)
    with pytest.raises(StreamError):
        classify_circles(0.2, 0.2, -1)


@given(unit, unit, st.integers(0, 50))
def test_binary_reversal_property(x, y, ctx):
    a = classify_sine1(x, y, ctx)
    b = classify_sine1(x, y, ctx + 1)
    assert a != b
    assert classify_sine2(x, y, ctx) != classify_sine2(x, y, ctx + 1)


# -- LED ----------------------------------------------------------------------

def test_led_digit_encodings():
    rng = random.Random(0)
    inst = generate_led(0, rng, digit=8)
    assert inst.features[:7] == ("1",) * 7
    assert inst.label == "8"
    inst = generate_led(0, rng, digit=1)
    assert sum(int(b) for b in inst.features[:7]) == 2
    assert len(inst.features) == 24


@given(st.integers(0, 20), st.integers(0, 9), st.integers(0, 2 ** 32))
def test_led_drift_is_a_permutation(ctx, digit, seed):
    a = generate_led(0, random.Random(seed), digit=digit)
    b = generate_led(ctx, random.Random(seed), digit=digit)
    assert Counter(a.features) == Counter(b.features)
    pos = led_positions(ctx)
    assert sorted(pos) == list(range(24))
    # the segments of the digit land on the permuted positions
    for i, seg in enumerate(LED_SEGMENTS[digit]):
        assert b.features[pos[i]] == str(seg)


def test_led_context_one_moves_three_segments():
    pos = led_positions(1, swaps=3)
    moved = [i for i in range(7) if pos[i] != i]
    assert len(moved) == 3


# -- schedule -----------------------------------------------------------------

def test_schedule_validation():
    with pytest.raises(StreamError):
        DriftSchedule((100, 100))
    with pytest.raises(StreamError):
        DriftSchedule((100, 140), zeta=50)
    with pytest.raises(StreamError):
        DriftSchedule((100,), delta_accept=-1)
    DriftSchedule((100, 151), zeta=50)


def test_sigmoid_midpoint_and_tails():
    s = DriftSchedule((1000,), zeta=50)
    c = s.transition_center(0)
    assert s.transition_probability(0, c) == pytest.approx(0.5)
    assert s.transition_probability(0, c - 50) <= 1 / (1 + math.exp(4)) + 1e-12
    assert s.transition_probability(0, c + 50) >= 1 - 1 / (1 + math.exp(4)) - 1e-12
    abrupt = DriftSchedule((1000,), zeta=0)
    assert abrupt.transition_probability(0, 999) == 0.0
    assert abrupt.transition_probability(0, 1000) == 1.0


@given(st.integers(0, 3000), st.integers(0, 3000))
def test_sigmoid_monotone(t1, t2):
    s = DriftSchedule((1500,), zeta=500)
    if t1 <= t2:
        assert s.transition_probability(0, t1) <= s.transition_probability(0, t2)


# -- generators -----------------------------------------------------------------

def test_generator_config_validation():
    with pytest.raises(StreamError):
        GeneratorConfig("SINE1", noise=1.5)
    with pytest.raises(StreamError):
        GeneratorConfig("NOPE")
    with pytest.raises(StreamError):
        GeneratorConfig("SINE1", total=100, schedule=DriftSchedule((200,)))


def test_standard_regime_sine1():
    cfg = GeneratorConfig.standard("SINE1")
    assert cfg.total == 100_000
    assert cfg.schedule.drift_locations == (20_000, 40_000, 60_000, 80_000)
    assert cfg.schedule.zeta == 50
    assert cfg.schedule.delta_accept == 250
    circles = GeneratorConfig.standard("CIRCLES")
    assert circles.schedule.zeta == 500 and circles.schedule.delta_accept == 1000


@pytest.mark.parametrize("kind", sorted(SCHEMAS))
def test_determinism_and_schema(kind):
    cfg = GeneratorConfig.standard(kind, seed=7, total=3000)
    a = list(generate(cfg))
    b = list(generate(cfg))
    assert a == b
    assert len(a) == 3000
    for inst in a[:200]:
        cfg.schema.validate(inst)
    other = list(generate(GeneratorConfig.standard(kind, seed=8, total=3000)))
    assert other != a


@pytest.mark.parametrize("kind", sorted(SCHEMAS))
def test_noise_free_matches_concept(kind):
    sched = DriftSchedule((1000,), zeta=0)
    cfg = GeneratorConfig(kind, total=2000, noise=0.0, seed=3, schedule=sched)
    for t, inst in enumerate(generate(cfg)):
        assert inst.label == clean_label(cfg, inst.features, sched.context_of(t))


@pytest.mark.parametrize("kind,p", [("SINE1", 0.1), ("LED", 0.1), ("STAGGER", 0.3)])
def test_noise_rate(kind, p):
    n = 40_000
    cfg = GeneratorConfig(kind, total=n, noise=p, seed=11)
    flipped = sum(inst.label != clean_label(cfg, inst.features, 0) for inst in generate(cfg))
    assert abs(flipped / n - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_transition_band_uses_both_concepts():
    # well before the centre almost everything follows context 0, well after context 1
    sched = DriftSchedule((5000,), zeta=500)
    cfg = GeneratorConfig("SINE1", total=10_000, noise=0.0, seed=5, schedule=sched)
    inst = list(generate(cfg))
    c = sched.transition_center(0)

    def share_new(lo, hi):
        rows = inst[lo:hi]
        ok = [r.label == clean_label(cfg, r.features, 1) for r in rows]
        return sum(ok) / len(ok)

    assert share_new(0, int(c - 500)) < 0.02
    assert share_new(int(c + 500), 10_000) > 0.98
    assert 0.3 < share_new(int(c - 20), int(c + 20)) < 0.7


# -- tabular IO -------------------------------------------------------------------

def small_schema():
    return StreamSchema((Attribute("a"), Attribute("b", "nominal", ("x", "y")), Attribute("c")),
                        ("p", "q"))


def test_tabular_round_trip(tmp_path):
    schema = small_schema()
    rows = [Instance((0.5, "x", 1.25), "p"), Instance((-1.0, "y", 3.0), "q")]
    path = tmp_path / "d.csv"
    write_tabular(rows, path, schema)
    assert list(ingest_tabular(path, schema)) == rows
    write_schema(schema, tmp_path / "d.schema")
    assert read_schema(tmp_path / "d.schema") == schema


def test_tabular_errors(tmp_path):
    schema = small_schema()
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c,class\n1,x,2,p\n1,z,2,p\n")
    with pytest.raises(TabularFormatError) as info:
        list(ingest_tabular(path, schema))
    assert info.value.line == 3 and info.value.column == "b"
    path.write_text("a,b,class\n1,x,p\n")
    with pytest.raises(SchemaMismatch):
        list(ingest_tabular(path, schema))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert list(ingest_tabular(empty, schema)) == []
    with pytest.raises(OSError):
        list(ingest_tabular(tmp_path / "missing.csv", schema))


def test_generated_stream_round_trips_through_csv(tmp_path):
    cfg = GeneratorConfig.standard("MIXED", seed=2, total=500)
    path = tmp_path / "m.csv"
    write_tabular(generate(cfg), path, cfg.schema)
    assert list(ingest_tabular(path, cfg.schema)) == list(generate(cfg))


# -- label shift ------------------------------------------------------------------

def test_label_shift_examples():
    classes = ("a", "b")
    rows = [Instance((float(i),), "a" if i % 3 else "b") for i in range(20_000)]
    sched = DriftSchedule((20_000, 40_000, 60_000, 80_000), zeta=50)
    out = list(synthesize_label_shift(replay(rows, 5), sched, random.Random(1), classes))
    assert len(out) == 100_000
    assert [r.label for r in out[:19_000]] == [r.label for r in rows[:19_000]]
    flipped = out[21_000:39_000]
    assert all(o.label != r.label for o, r in zip(flipped, rows[1000:19_000]))


@given(st.integers(1, 6), st.integers(0, 30))
def test_rotation_is_bijection(k, ctx):
    classes = tuple(f"c{i}" for i in range(k + 1))
    image = {rotate_label(c, classes, ctx) for c in classes}
    assert image == set(classes)
