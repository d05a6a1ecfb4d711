"""Per-taxel min-max normalisation and Savitzky-Golay smoothing."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EmptyStream, ShortSeries, SpecError
from .geometry import TaxelFrame, frames_from_array, frames_to_array

__all__ = [
    "SavGolSpec",
    "CalibRange",
    "estimate_calibration",
    "minmax_normalize",
    "savgol_filter",
    "smooth_frames",
    "normalize_frames",
]

NORM_LOW, NORM_HIGH = 1.0, 2.0
CLAMP_LOW, CLAMP_HIGH = 0.5, 2.5


@dataclass(frozen=True)
class SavGolSpec:
    window: int = 7
    order: int = 3

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise SpecError(f"window must be an odd integer >= 3, got {self.window}")
        if self.order < 1 or self.order >= self.window:
            raise SpecError(f"order must satisfy 1 <= order < window, got {self.order}")


@dataclass(frozen=True, eq=False)
class CalibRange:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("calibration needs max > min for every taxel")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


def estimate_calibration(frames, prefix_len: int = 50) -> CalibRange:
    """Per-taxel min/max over the first ``prefix_len`` frames.

    Channels that are constant over the prefix get ``max = min + 1``.
    """
    prefix = list(frames[:prefix_len]) if prefix_len > 0 else []
    if len(prefix) < 2:
        raise EmptyStream(f"calibration needs at least 2 frames, got {len(prefix)}")
    _, x = frames_to_array(prefix)
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)
    return CalibRange(lo, hi)


def minmax_normalize(frame: TaxelFrame, calib: CalibRange) -> TaxelFrame:
    """Map each taxel affinely from [min, max] to [1, 2] and clamp to [0.5, 2.5]."""
    v = NORM_LOW + (frame.values - calib.lo) * (NORM_HIGH - NORM_LOW) / (calib.hi - calib.lo)
    return TaxelFrame(frame.timestamp, np.clip(v, CLAMP_LOW, CLAMP_HIGH))


def normalize_frames(frames, calib: CalibRange):
    return [minmax_normalize(f, calib) for f in frames]


@lru_cache(maxsize=256)
def _fit_row(n_left: int, n_right: int, order: int) -> np.ndarray:
    # Weights that evaluate, at offset 0, the least-squares polynomial fitted
    # to samples at offsets -n_left..n_right.
    offsets = np.arange(-n_left, n_right + 1, dtype=float)
    deg = min(order, len(offsets) - 1)
    A = np.vander(offsets, deg + 1, increasing=True)
    # value at 0 is the constant coefficient: first row of pinv(A)
    row = np.linalg.pinv(A)[0]
    row.setflags(write=False)
    return row


def savgol_filter(series, spec: SavGolSpec = SavGolSpec()) -> np.ndarray:
    """Savitzky-Golay smoothing of a 1D series (or each column of a 2D array).

    Interior samples use the centred window.  The first and last
    ``window // 2`` samples use the truncated one-sided window that still
    fits inside the series, with the polynomial order lowered when too few
    samples remain.  Output length equals input length.
    """
    x = np.asarray(series, dtype=float)
    if x.shape[0] < spec.window:
        raise ShortSeries(f"series of length {x.shape[0]} shorter than window {spec.window}")
    half = spec.window // 2
    n = x.shape[0]
    out = np.empty_like(x)
    center = _fit_row(half, half, spec.order)
    # sliding_window_view keeps this a single BLAS call per column block
    windows = np.lib.stride_tricks.sliding_window_view(x, spec.window, axis=0)
    out[half : n - half] = windows @ center
    for i in range(half):
        left = _fit_row(i, half, spec.order)
        out[i] = left @ x[: i + half + 1]
        j = n - 1 - i
        right = _fit_row(half, i, spec.order)
        out[j] = right @ x[j - half :]
    return out


def smooth_frames(frames, spec: SavGolSpec = SavGolSpec()):
    """Apply :func:`savgol_filter` to every taxel channel of a frame sequence."""
    t, x = frames_to_array(frames)
    return frames_from_array(t, savgol_filter(x, spec))
