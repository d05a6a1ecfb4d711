"""End-to-end wiring: frames -> events -> windows -> surfaces -> trajectory."""
from __future__ import annotations

import numpy as np

from .aggregate import aggregate, raw_activity_frames
from .contour import Trajectory, track
from .events import stream_events
from .geometry import PipelineConfig, SensorLayout, validate_stream
from .preprocess import SavGolSpec, smooth_frames
from .surface import interpolate_grid, triangulate

__all__ = ["Pipeline"]


class Pipeline:
    """Holds a layout's triangulation and a config; runs the tracking stages.

    Building the object pays for the triangulation and the Sibson weight
    matrix once; every later call only does array arithmetic and contouring.
    """

    def __init__(self, layout: SensorLayout, config: PipelineConfig | None = None):
        self.layout = layout
        self.config = config or PipelineConfig()
        self.tri = triangulate(layout)
        # warm the weight cache
        interpolate_grid(np.zeros(layout.taxel_count), self.tri, self.config.grid_cols, self.config.grid_rows)

    def prepare(self, frames):
        """Validate and (optionally) Savitzky-Golay smooth raw frames."""
        frames, _ = validate_stream(frames, self.layout.taxel_count)
        c = self.config
        if c.smooth and len(frames) >= c.savgol_window:
            frames = smooth_frames(frames, SavGolSpec(c.savgol_window, c.savgol_order))
        return frames

    def events(self, frames, prepared=False):
        if not prepared:
            frames = self.prepare(frames)
        return stream_events(frames, self.config.tau, carry_over=self.config.carry_over)

    def event_frames(self, stream, t0=0.0, span=None):
        c = self.config
        return aggregate(stream, c.agg_window, t0=t0, taxel_count=self.layout.taxel_count, span=span, signed=c.signed)

    def surfaces(self, event_frames):
        c = self.config
        for fr in event_frames:
            yield fr, interpolate_grid(fr, self.tri, c.grid_cols, c.grid_rows)

    def track_events(self, stream, t0=0.0, span=None) -> Trajectory:
        return track(self.surfaces(self.event_frames(stream, t0, span)), self.config)

    def track_frames(self, frames) -> Trajectory:
        """Full event pipeline over raw frames; windows start at the first frame."""
        frames = self.prepare(frames)
        stream = self.events(frames, prepared=True)
        span = (frames[0].timestamp, frames[-1].timestamp)
        return self.track_events(stream, t0=frames[0].timestamp, span=span)

    def track_raw(self, frames) -> Trajectory:
        """Baseline: the same surface/contour stages fed with per-window |change| of raw values."""
        frames = self.prepare(frames)
        raw = raw_activity_frames(frames, self.config.agg_window, t0=frames[0].timestamp)
        return track(self.surfaces(raw), self.config)
