"""Accumulate events into disjoint temporal windows."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["EventFrame", "aggregate", "window_index", "raw_activity_frames"]

# Events closer than this fraction of a window to the next boundary are
# treated as lying on it; absorbs float error in t0 + k * window.
_BOUNDARY_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class EventFrame:
    window_start: float
    window_end: float
    pos_counts: np.ndarray
    neg_counts: np.ndarray
    activity: np.ndarray

    def __post_init__(self):
        for name in ("pos_counts", "neg_counts", "activity"):
            a = np.array(getattr(self, name), copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def total_events(self) -> int:
        return int(self.pos_counts.sum() + self.neg_counts.sum())

    @property
    def taxel_count(self) -> int:
        return len(self.activity)

    def __eq__(self, other):
        if not isinstance(other, EventFrame):
            return NotImplemented
        return (
            self.window_start == other.window_start
            and self.window_end == other.window_end
            and np.array_equal(self.pos_counts, other.pos_counts)
            and np.array_equal(self.neg_counts, other.neg_counts)
            and np.array_equal(self.activity, other.activity)
        )

    __hash__ = None


def window_index(timestamps, window, t0=0.0):
    """Index k of the half-open window ``[t0 + k*window, t0 + (k+1)*window)``."""
    q = (np.asarray(timestamps, dtype=float) - t0) / window
    return np.floor(q + _BOUNDARY_SLACK).astype(np.int64)


def aggregate(stream, window, t0=0.0, taxel_count=None, span=None, signed=False):
    """Bin an :class:`~gradtac.events.EventStream` into :class:`EventFrame` objects.

    Windows run from ``t0`` up to the window holding the last event, or, when
    ``span=(start, end)`` is given, cover every window intersecting
    ``[start, end)``; windows without events are emitted with zero counts.
    An empty stream without a span yields no frames.  Events before ``t0``
    are rejected.

    ``activity`` is ``pos + neg`` by default, ``pos - neg`` when ``signed``.
    """
    if not window > 0:
        raise ValueError(f"window must be positive, got {window}")
    if taxel_count is None:
        taxel_count = int(stream.taxels.max()) + 1 if len(stream) else 0
    k = window_index(stream.timestamps, window, t0)
    if len(k) and k.min() < 0:
        raise ValueError("stream contains events before t0")

    if span is not None:
        k_first = max(0, int(window_index([span[0]], window, t0)[0]))
        end_q = (span[1] - t0) / window
        k_last = max(k_first, int(math.ceil(end_q - _BOUNDARY_SLACK)) - 1)
        if len(k):
            k_last = max(k_last, int(k.max()))
            k_first = min(k_first, int(k.min()))
    elif len(k):
        k_first, k_last = 0, int(k.max())
    else:
        return []

    n_win = k_last - k_first + 1
    pos = np.zeros((n_win, taxel_count), dtype=np.int64)
    neg = np.zeros((n_win, taxel_count), dtype=np.int64)
    if len(k):
        rows = k - k_first
        is_pos = stream.polarities > 0
        np.add.at(pos, (rows[is_pos], stream.taxels[is_pos]), 1)
        np.add.at(neg, (rows[~is_pos], stream.taxels[~is_pos]), 1)
    act = (pos - neg) if signed else (pos + neg)
    frames = []
    for r in range(n_win):
        start = t0 + (k_first + r) * window
        frames.append(EventFrame(start, start + window, pos[r], neg[r], act[r].astype(float)))
    return frames


def raw_activity_frames(frames, window, t0=None):
    """Baseline activity built from raw values instead of events.

    Each window's activity for a taxel is the summed absolute change of its
    value between consecutive packets whose later packet falls in the
    window.  Counts are left at zero; the total change stands in for the
    event total when gating.
    """
    ts = np.array([f.timestamp for f in frames])
    x = np.vstack([f.values for f in frames])
    if t0 is None:
        t0 = float(ts[0])
    change = np.abs(np.diff(x, axis=0))
    k = window_index(ts[1:], window, t0)
    n_win = int(k.max()) + 1 if len(k) else 0
    act = np.zeros((n_win, x.shape[1]))
    np.add.at(act, k, change)
    zeros = np.zeros(x.shape[1], dtype=np.int64)
    return [
        EventFrame(t0 + r * window, t0 + (r + 1) * window, zeros, zeros, act[r])
        for r in range(n_win)
    ]
