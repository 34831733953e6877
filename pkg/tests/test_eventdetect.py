import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from powerprint.eventdetect import detect_edges, segment_between, segments_to_signals
from powerprint.signals import PowerSignal


def step(n=200, at=50, height=100.0, base=0.0):
    x = np.full(n, base)
    x[at:] += height
    return x


def test_single_step():
    events = detect_edges(PowerSignal(step()), threshold_watts=30)
    assert len(events) == 1
    assert events[0].index == 50 and events[0].kind == "ON"
    assert events[0].delta_watts == pytest.approx(100.0)


def test_flat_signal_has_no_events():
    assert detect_edges(np.full(100, 42.0), 30) == []


def test_up_then_down():
    x = step()
    x[150:] -= 100
    events = detect_edges(x, 30)
    assert [(e.index, e.kind) for e in events] == [(50, "ON"), (150, "OFF")]


def test_single_sample_spike_is_smoothed_away():
    x = np.full(100, 10.0)
    x[40] = 500
    assert detect_edges(x, 30, smooth_window=3) == []
    assert len(detect_edges(x, 30, smooth_window=1)) == 2


def test_ramped_step_merges_into_one_event():
    x = np.zeros(100)
    x[50], x[51:] = 40.0, 100.0
    events = detect_edges(x, 30, smooth_window=1)
    assert len(events) == 1
    assert events[0].index == 51 and events[0].delta_watts == pytest.approx(100.0)


def test_validation():
    with pytest.raises(ValueError):
        detect_edges(np.zeros(10), 0)
    with pytest.raises(ValueError):
        detect_edges(np.zeros(10), 30, smooth_window=4)
    with pytest.raises(ValueError):
        detect_edges(np.zeros(3), 30, smooth_window=3)


def test_rectangle_segment_is_baseline_corrected():
    x = np.full(300, 20.0)
    x[50:150] += 100.0
    events = detect_edges(x, 30)
    segs = segment_between(x, events)
    assert len(segs) == 1
    s = segs[0]
    assert (s.start, s.end) == (50, 150)
    assert len(s) == 100
    np.testing.assert_allclose(s.samples, 100.0)


def test_segment_edge_cases():
    x = step(n=60, at=10)
    assert segment_between(x, []) == []
    segs = segment_between(x, detect_edges(x, 30))
    assert [(s.start, s.end) for s in segs] == [(10, 60)]
    short = np.zeros(100)
    short[20:25] = 100
    assert segment_between(short, detect_edges(short, 30)) == []
    with pytest.raises(ValueError):
        segment_between(x, list(reversed(detect_edges(step(), 30) + detect_edges(step(at=80), 30))))


def test_segments_become_signals():
    x = np.full(300, 20.0)
    x[50:150] += 100.0
    sigs = segments_to_signals(segment_between(x, detect_edges(x, 30)), source_id="house1")
    assert sigs[0].source_id == "house1:50-150" and len(sigs[0]) == 100


def rectangles(k, rng, n=None, threshold=30.0):
    """Aggregate with k non-overlapping rectangles on a noiseless 5 W floor."""
    width_gap = [(int(rng.integers(12, 40)), int(rng.integers(12, 40))) for _ in range(k)]
    n = n or 10 + sum(w + g for w, g in width_gap)
    x = np.full(n, 5.0)
    truth = []
    pos = 10
    for w, g in width_gap:
        h = float(rng.uniform(threshold * 1.2, 2000))
        x[pos:pos + w] += h
        truth.append((pos, pos + w))
        pos += w + g
    return x, truth


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.sampled_from([1, 3, 5]))
def test_rectangle_recovery(k, seed, window):
    x, truth = rectangles(k, np.random.default_rng(seed))
    events = detect_edges(x, 30, window)
    idx = [e.index for e in events]
    assert idx == sorted(set(idx))
    assert all(abs(e.delta_watts) >= 30 for e in events)
    ons = [e.index for e in events if e.kind == "ON"]
    offs = [e.index for e in events if e.kind == "OFF"]
    assert len(ons) == len(offs) == k
    for (a, b), on, off in zip(truth, ons, offs):
        assert abs(on - a) <= window and abs(off - b) <= window
