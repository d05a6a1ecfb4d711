"""Logarithmic-change events from consecutive taxel packets.

Between two packets ``x_prev`` (time ``t_prev``) and ``x_next`` (time
``t_next``) a taxel fires ``floor(|ln x_next - ln x_prev| / tau)`` events.
The k-th event is placed where the linearly interpolated raw value first
reaches ``x_prev * exp(+-k * tau)``.  Because the levels are multiplicative
while the interpolation is linear in the raw value, events crowd towards
``t_prev`` and thin out towards ``t_next``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .geometry import frames_to_array

__all__ = [
    "TactileEvent",
    "EventStream",
    "events_between",
    "stream_events",
    "TIME_RESOLUTION",
]

# Stream timestamps are snapped to this grid (the events CSV precision) so
# that streams are reproducible bit for bit across scaling and file round trips.
TIME_RESOLUTION = 1e-9


class TactileEvent(NamedTuple):
    timestamp: float
    taxel: int
    polarity: int


def _check_pair(x_prev, x_next, t_prev, t_next, tau):
    if not (x_prev > 0 and x_next > 0):
        raise DomainError(f"taxel values must be positive, got {x_prev}, {x_next}")
    if not (math.isfinite(x_prev) and math.isfinite(x_next)):
        raise DomainError("taxel values must be finite")
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"tau must be positive, got {tau}")
    if not t_next > t_prev:
        raise DomainError(f"t_next ({t_next}) must exceed t_prev ({t_prev})")


def _fractions(d, tau, n):
    # Position of the k-th level crossing within the interval, as a fraction
    # of its length.  Depends on the log ratio only, hence scale invariant.
    k = np.arange(1, n + 1, dtype=float)
    frac = np.expm1(math.copysign(1.0, d) * k * tau) / math.expm1(d)
    return np.minimum(frac, 1.0)


def events_between(x_prev, x_next, t_prev, t_next, taxel, tau, ref=None):
    """Events fired by one taxel between two packets.

    ``ref`` is the reference level of the last fired event when residual
    change is carried across intervals; by default the reference is
    ``x_prev`` and sub-threshold residue is discarded.
    """
    _check_pair(x_prev, x_next, t_prev, t_next, tau)
    if ref is None:
        ref = x_prev
    elif not ref > 0:
        raise DomainError(f"reference level must be positive, got {ref}")
    d = math.log(x_next) - math.log(ref)
    n = int(math.floor(abs(d) / tau))
    if n == 0 or x_next == x_prev:
        return []
    pol = 1 if d > 0 else -1
    if ref == x_prev:
        frac = _fractions(d, tau, n)
    else:
        levels = ref * np.exp(pol * np.arange(1, n + 1) * tau)
        frac = np.minimum((levels - x_prev) / (x_next - x_prev), 1.0)
    times = t_prev + frac * (t_next - t_prev)
    return [TactileEvent(float(t), int(taxel), pol) for t in times]


@dataclass(frozen=True, eq=False)
class EventStream:
    """Time-ordered events stored column-wise."""

    timestamps: np.ndarray
    taxels: np.ndarray
    polarities: np.ndarray
    tau: float = float("nan")
    delta: float = float("nan")

    def __post_init__(self):
        t = np.array(self.timestamps, dtype=float)
        j = np.array(self.taxels, dtype=np.int64)
        p = np.array(self.polarities, dtype=np.int8)
        if not (t.ndim == j.ndim == p.ndim == 1 and len(t) == len(j) == len(p)):
            raise ValueError("event columns must be 1D and of equal length")
        for a in (t, j, p):
            a.setflags(write=False)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "taxels", j)
        object.__setattr__(self, "polarities", p)

    @classmethod
    def empty(cls, tau=float("nan"), delta=float("nan")):
        return cls(np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8), tau, delta)

    @classmethod
    def from_events(cls, events, tau=float("nan"), delta=float("nan")):
        events = list(events)
        if not events:
            return cls.empty(tau, delta)
        t, j, p = zip(*events)
        return cls(np.array(t), np.array(j), np.array(p), tau, delta)

    def __len__(self):
        return len(self.timestamps)

    def __iter__(self):
        for t, j, p in zip(self.timestamps.tolist(), self.taxels.tolist(), self.polarities.tolist()):
            yield TactileEvent(t, j, p)

    def __getitem__(self, i):
        return TactileEvent(float(self.timestamps[i]), int(self.taxels[i]), int(self.polarities[i]))

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.taxels, other.taxels)
            and np.array_equal(self.polarities, other.polarities)
        )

    __hash__ = None

    def quantized(self, resolution=TIME_RESOLUTION):
        """Copy with timestamps snapped to ``resolution`` seconds."""
        digits = int(round(-math.log10(resolution)))
        return EventStream(np.round(self.timestamps, digits), self.taxels, self.polarities, self.tau, self.delta)


def _pairwise_counts(logx, tau):
    d = np.diff(logx, axis=0)
    n = np.floor(np.abs(d) / tau).astype(np.int64)
    return d, n


def stream_events(frames, tau, carry_over=False, resolution=TIME_RESOLUTION):
    """Events for every consecutive frame pair and every taxel, in time order.

    Ties in time are broken by taxel index.  Timestamps are snapped to
    ``resolution`` seconds (pass ``None`` to keep them exact).
    """
    if len(frames) < 2:
        raise DomainError(f"need at least 2 frames, got {len(frames)}")
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"tau must be positive, got {tau}")
    t, x = frames_to_array(frames)
    dt = np.diff(t)
    bad_t = np.flatnonzero(~(dt > 0))
    if bad_t.size:
        raise DomainError(f"frame {bad_t[0] + 1}: timestamps must strictly increase")
    bad_x = np.argwhere(~(x > 0) | ~np.isfinite(x))
    if bad_x.size:
        i, j = bad_x[0]
        raise DomainError(f"frame {i}, taxel {j}: value {x[i, j]} is not a positive finite number")
    delta = float(np.median(dt))

    if carry_over:
        ts, js, ps = _carry_over_events(t, x, tau)
    else:
        ts, js, ps = _interval_events(t, x, tau)

    if resolution is not None:
        digits = int(round(-math.log10(resolution)))
        ts = np.round(ts, digits)
    order = np.lexsort((js, ts))
    return EventStream(ts[order], js[order], ps[order], tau, delta)


def _interval_events(t, x, tau):
    logx = np.log(x)
    d, n = _pairwise_counts(logx, tau)
    # identical raw values never fire even if log rounding disagrees
    n[x[1:] == x[:-1]] = 0
    total = int(n.sum())
    if total == 0:
        return np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8)
    ii, jj = np.nonzero(n)
    counts = n[ii, jj]
    dsel = d[ii, jj]
    rep_i = np.repeat(ii, counts)
    rep_j = np.repeat(jj, counts)
    rep_d = np.repeat(dsel, counts)
    # k = 1..count within each (interval, taxel) group
    starts = np.cumsum(counts) - counts
    k = np.arange(total) - np.repeat(starts, counts) + 1
    pol = np.sign(rep_d)
    frac = np.minimum(np.expm1(pol * k * tau) / np.expm1(rep_d), 1.0)
    ts = t[rep_i] + frac * (t[rep_i + 1] - t[rep_i])
    return ts, rep_j.astype(np.int64), pol.astype(np.int8)


def _carry_over_events(t, x, tau):
    ref = x[0].copy()
    out_t, out_j, out_p = [], [], []
    for i in range(len(t) - 1):
        d = np.log(x[i + 1]) - np.log(ref)
        counts = np.floor(np.abs(d) / tau).astype(np.int64)
        for j in np.flatnonzero(counts):
            if x[i + 1, j] == x[i, j]:
                continue
            ev = events_between(x[i, j], x[i + 1, j], t[i], t[i + 1], j, tau, ref=ref[j])
            if ev:
                out_t.extend(e.timestamp for e in ev)
                out_j.extend([j] * len(ev))
                out_p.extend([ev[0].polarity] * len(ev))
                ref[j] = ref[j] * math.exp(ev[0].polarity * len(ev) * tau)
    return np.array(out_t, dtype=float), np.array(out_j, dtype=np.int64), np.array(out_p, dtype=np.int8)
