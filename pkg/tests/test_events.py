import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import frames_of
from oracles import fine_step_events
from gradtac.errors import DomainError
from gradtac.events import EventStream, TactileEvent, events_between, stream_events
from gradtac.geometry import TaxelFrame

values = st.floats(0.5, 5000.0, allow_nan=False)
taus = st.floats(0.005, 0.2)


def test_equal_values_no_events():
    assert events_between(1000.0, 1000.0, 0.0, 0.01, 0, 0.02) == []


def test_worked_example_rising():
    ev = events_between(1000.0, 1100.0, 0.0, 0.01, 3, 0.02)
    assert len(ev) == 4
    assert all(e.polarity == 1 and e.taxel == 3 for e in ev)
    expected = [1e-4 * (1000 * math.exp(0.02 * k) - 1000) for k in range(1, 5)]
    assert np.allclose([e.timestamp for e in ev], expected, rtol=0, atol=1e-15)
    gaps = np.diff([0.0] + [e.timestamp for e in ev])
    assert np.all(np.diff(gaps) > 0)


def test_worked_example_falling():
    ev = events_between(1100.0, 1000.0, 0.0, 0.01, 0, 0.02)
    assert len(ev) == 4 and all(e.polarity == -1 for e in ev)


def test_worked_example_matches_oracle():
    times, pol = fine_step_events(1000.0, 1100.0, 0.0, 0.01, 0.02)
    ev = events_between(1000.0, 1100.0, 0.0, 0.01, 0, 0.02)
    assert pol == 1 and len(times) == 4
    assert np.allclose([e.timestamp for e in ev], times, rtol=0, atol=1e-9 * 0.01)


@pytest.mark.parametrize(
    "args",
    [(0.0, 1.0, 0, 0.01, 0, 0.1), (1.0, -1.0, 0, 0.01, 0, 0.1), (1.0, 2.0, 0.01, 0.01, 0, 0.1), (1.0, 2.0, 0, 0.01, 0, 0.0), (1.0, math.inf, 0, 1, 0, 0.1)],
)
def test_domain_errors(args):
    with pytest.raises(DomainError):
        events_between(*args)


@settings(max_examples=300, deadline=None)
@given(values, values, taus)
def test_count_law_and_oracle(a, b, tau):
    ev = events_between(a, b, 0.0, 0.01, 0, tau)
    n = math.floor(abs(math.log(b) - math.log(a)) / tau)
    assert len(ev) == (0 if a == b else n)
    times, _ = fine_step_events(a, b, 0.0, 0.01, tau)
    if len(times) == len(ev):
        assert np.allclose([e.timestamp for e in ev], times, rtol=0, atol=1e-9 * 0.01)


@settings(max_examples=200, deadline=None)
@given(values, values, taus, st.floats(0.01, 100.0))
def test_scale_invariance(a, b, tau, c):
    e1 = events_between(a, b, 0.0, 0.01, 0, tau)
    e2 = events_between(c * a, c * b, 0.0, 0.01, 0, tau)
    assert len(e1) == len(e2)
    assert np.allclose([e.timestamp for e in e1], [e.timestamp for e in e2], rtol=0, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(values, values, taus)
def test_antisymmetry(a, b, tau):
    up = events_between(a, b, 0.0, 0.01, 0, tau)
    down = events_between(b, a, 0.0, 0.01, 0, tau)
    assert len(up) == len(down)
    assert all(u.polarity == -d.polarity for u, d in zip(up, down))


@settings(max_examples=200, deadline=None)
@given(values, values, taus)
def test_timestamps_in_interval_and_tapering(a, b, tau):
    ev = events_between(a, b, 1.0, 1.01, 0, tau)
    t = np.array([e.timestamp for e in ev])
    if len(t):
        assert t[0] > 1.0 and t[-1] <= 1.01
        assert np.all(np.diff(t) > 0)
        gaps = np.diff(np.concatenate([[1.0], t]))
        # rising: levels spread apart in raw units, so gaps grow; falling:
        # they crowd together and gaps shrink
        sign = 1 if b > a else -1
        assert np.all(sign * np.diff(gaps) >= -1e-15)


@settings(max_examples=200, deadline=None)
@given(values, values, taus, taus)
def test_threshold_monotonicity(a, b, t1, t2):
    lo, hi = sorted((t1, t2))
    assert len(events_between(a, b, 0, 1, 0, lo)) >= len(events_between(a, b, 0, 1, 0, hi))


def test_stream_identical_frames():
    s = stream_events(frames_of([[5.0, 6.0], [5.0, 6.0]]), 0.01)
    assert len(s) == 0


def test_stream_step_up_down():
    s = stream_events(frames_of([[1000.0], [1100.0], [1000.0]]), 0.02)
    assert list(s.polarities) == [1] * 4 + [-1] * 4
    assert np.all(np.diff(s.timestamps) >= 0)


def test_stream_matches_pairwise_composition():
    rng = np.random.default_rng(0)
    vals = rng.uniform(500, 1500, size=(6, 4))
    fr = frames_of(vals)
    s = stream_events(fr, 0.05, resolution=None)
    ref = []
    for i in range(5):
        for j in range(4):
            ref += events_between(vals[i, j], vals[i + 1, j], fr[i].timestamp, fr[i + 1].timestamp, j, 0.05)
    ref.sort(key=lambda e: (e.timestamp, e.taxel))
    assert len(ref) == len(s)
    assert np.allclose(s.timestamps, [e.timestamp for e in ref], rtol=0, atol=1e-15)
    assert list(s.taxels) == [e.taxel for e in ref]
    assert list(s.polarities) == [e.polarity for e in ref]


def test_stream_tie_break_by_taxel():
    s = stream_events(frames_of([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]), 0.1)
    t = s.timestamps
    for k in range(len(t) - 1):
        if t[k] == t[k + 1]:
            assert s.taxels[k] < s.taxels[k + 1]


def test_stream_scale_invariance_exact():
    rng = np.random.default_rng(1)
    vals = rng.uniform(1000, 3000, size=(20, 24))
    a = stream_events(frames_of(vals), 0.01)
    b = stream_events(frames_of(3.7 * vals), 0.01)
    assert a == b


def test_stream_records_config():
    s = stream_events(frames_of([[1.0], [2.0], [3.0]]), 0.1)
    assert s.tau == 0.1 and s.delta == pytest.approx(0.01)


def test_stream_errors_carry_frame_index():
    with pytest.raises(DomainError, match="frame 1"):
        stream_events(frames_of([[1.0], [-1.0]]), 0.1)
    with pytest.raises(DomainError):
        stream_events(frames_of([[1.0]]), 0.1)
    with pytest.raises(DomainError):
        stream_events([TaxelFrame(0.0, [1.0]), TaxelFrame(0.0, [2.0])], 0.1)


def test_carry_over_accumulates_small_steps():
    # ten 0.5 tau steps: discarded per interval, five events with carry-over
    tau = 0.02
    vals = 1000.0 * np.exp(0.5 * tau * np.arange(11))[:, None]
    assert len(stream_events(frames_of(vals), tau)) == 0
    s = stream_events(frames_of(vals), tau, carry_over=True)
    assert len(s) == 5 and set(s.polarities) == {1}


def test_carry_over_equals_interval_on_large_steps():
    vals = np.array([[1000.0], [1100.0], [1000.0]])
    a = stream_events(frames_of(vals), 0.02)
    b = stream_events(frames_of(vals), 0.02, carry_over=True)
    assert len(a) == len(b) and list(a.polarities) == list(b.polarities)


def test_eventstream_container():
    evs = [TactileEvent(0.1, 2, 1), TactileEvent(0.2, 0, -1)]
    s = EventStream.from_events(evs, tau=0.01)
    assert len(s) == 2 and s[1] == evs[1] and list(s) == evs
    assert EventStream.empty() == EventStream.from_events([])
