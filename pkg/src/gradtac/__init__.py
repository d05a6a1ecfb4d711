"""Tactile contact tracking from logarithmic taxel events.

Raw taxel packets become log-change events, events are counted in short
windows, per-taxel counts are spread over the sensor surface by natural
neighbour interpolation, and the centroid of the highest iso-contour is
tracked as the contact location.
"""
from .aggregate import EventFrame, aggregate
from .contour import ContourSet, TouchContour, TrackPoint, Trajectory, extract_contours, select_touch_region, track
from .errors import DataError, GradtacError
from .events import EventStream, events_between, stream_events
from .geometry import PipelineConfig, SensorLayout, TaxelFrame, default_layout, load_layout
from .pipeline import Pipeline
from .surface import EventSurface, interpolate_grid, nn_weights, triangulate

__version__ = "0.1.0"

__all__ = [
    "EventFrame",
    "aggregate",
    "ContourSet",
    "TouchContour",
    "TrackPoint",
    "Trajectory",
    "extract_contours",
    "select_touch_region",
    "track",
    "DataError",
    "GradtacError",
    "EventStream",
    "events_between",
    "stream_events",
    "PipelineConfig",
    "SensorLayout",
    "TaxelFrame",
    "default_layout",
    "load_layout",
    "Pipeline",
    "EventSurface",
    "interpolate_grid",
    "nn_weights",
    "triangulate",
]
