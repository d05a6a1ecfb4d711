import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import frames_of
from gradtac.aggregate import EventFrame, aggregate, raw_activity_frames, window_index
from gradtac.events import EventStream


def _stream(times, taxels, pols):
    return EventStream(np.array(times, float), np.array(taxels), np.array(pols))


def test_empty_stream_no_span():
    assert aggregate(EventStream.empty(), 0.05) == []


def test_empty_stream_with_span():
    fr = aggregate(EventStream.empty(), 0.05, taxel_count=4, span=(0.0, 0.15))
    assert len(fr) == 3
    assert all(f.total_events == 0 for f in fr)


def test_eight_events_one_bin():
    t = np.linspace(0.051, 0.099, 8)
    s = _stream(t, [5] * 8, [1, 1, 1, 1, 1, -1, -1, -1])
    fr = aggregate(s, 0.05, taxel_count=6)
    assert len(fr) == 2
    f = fr[1]
    assert (f.pos_counts[5], f.neg_counts[5], f.activity[5]) == (5, 3, 8)
    assert fr[0].total_events == 0


def test_boundary_goes_to_later_bin():
    fr = aggregate(_stream([0.05], [0], [1]), 0.05, taxel_count=1)
    assert len(fr) == 2 and fr[1].pos_counts[0] == 1 and fr[0].pos_counts[0] == 0


def test_float_boundary_slack():
    # 0.15 is not exactly 3 * 0.05 in binary; it still opens window 3
    assert window_index([0.15, 0.3, 0.7], 0.05).tolist() == [3, 6, 14]


def test_window_width_invariant():
    s = _stream([0.01, 0.33], [0, 1], [1, -1])
    for f in aggregate(s, 0.05, t0=0.0):
        assert abs((f.window_end - f.window_start) - 0.05) <= 1e-12


def test_signed_activity():
    s = _stream([0.01, 0.02, 0.03], [0, 0, 0], [1, 1, -1])
    f = aggregate(s, 0.05, signed=True)[0]
    assert f.activity[0] == 1


def test_events_before_t0_rejected():
    with pytest.raises(ValueError):
        aggregate(_stream([0.0], [0], [1]), 0.05, t0=0.1)


def test_bad_window():
    with pytest.raises(ValueError):
        aggregate(EventStream.empty(), 0.0)


def test_frames_immutable():
    f = aggregate(_stream([0.0], [0], [1]), 0.05)[0]
    with pytest.raises(ValueError):
        f.pos_counts[0] = 3


streams = st.lists(
    st.tuples(st.integers(0, 10_000), st.integers(0, 5), st.sampled_from([-1, 1])), min_size=1, max_size=200
)


def _from(items):
    items = sorted(items)
    # integer microseconds keep the refinement test free of float ties
    return _stream([i * 1e-5 for i, _, _ in items], [j for _, j, _ in items], [p for _, _, p in items])


@settings(max_examples=150, deadline=None)
@given(streams)
def test_conservation(items):
    s = _from(items)
    fr = aggregate(s, 0.01, taxel_count=6)
    assert sum(f.total_events for f in fr) == len(s)


@settings(max_examples=150, deadline=None)
@given(streams)
def test_refinement(items):
    s = _from(items)
    span = (0.0, 0.12)
    coarse = aggregate(s, 0.02, taxel_count=6, span=span)
    fine = aggregate(s, 0.01, taxel_count=6, span=span)
    assert len(fine) == 2 * len(coarse)
    for k, c in enumerate(coarse):
        a, b = fine[2 * k], fine[2 * k + 1]
        assert np.array_equal(a.pos_counts + b.pos_counts, c.pos_counts)
        assert np.array_equal(a.neg_counts + b.neg_counts, c.neg_counts)


def test_raw_activity_sums_abs_change():
    vals = np.array([[1.0, 5.0], [2.0, 5.0], [0.5, 6.0], [0.5, 6.0]])
    fr = raw_activity_frames(frames_of(vals), 0.02, t0=0.0)
    # packets at 0.01 and 0.02 fall in windows 0 and 1
    assert np.allclose(fr[0].activity, [1.0, 0.0])
    assert np.allclose(fr[1].activity, [1.5, 1.0])
    assert all(isinstance(f, EventFrame) for f in fr)
