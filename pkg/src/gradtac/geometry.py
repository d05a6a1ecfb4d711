"""Sensor layout, raw taxel frames and pipeline configuration.

Everything entering the pipeline passes through this module.  Units are
millimetres for positions and seconds for time; taxel readings are
dimensionless ADC-like counts.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from .errors import CountError, EmptyStream, GeometryError, ParseError

__all__ = [
    "SensorLayout",
    "TaxelFrame",
    "PipelineConfig",
    "load_layout",
    "serialize_layout",
    "default_layout",
    "validate_stream",
    "frames_to_array",
    "frames_from_array",
]

MIN_SITE_SEPARATION = 1e-6


def _frozen(a, shape_tail=None, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    if shape_tail is not None and (arr.ndim != 2 or arr.shape[1] != shape_tail):
        raise CountError(f"expected an (n, {shape_tail}) array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SensorLayout:
    """Taxel identities with 3D design positions and projected 2D coordinates."""

    positions_3d: np.ndarray
    positions_2d: np.ndarray
    name: str = "layout"

    def __post_init__(self):
        p3 = _frozen(self.positions_3d, 3)
        p2 = _frozen(self.positions_2d, 2)
        if len(p3) != len(p2):
            raise CountError(
                f"positions_3d has {len(p3)} entries but positions_2d has {len(p2)}"
            )
        if not (np.all(np.isfinite(p3)) and np.all(np.isfinite(p2))):
            raise GeometryError("layout coordinates must be finite")
        object.__setattr__(self, "positions_3d", p3)
        object.__setattr__(self, "positions_2d", p2)
        _check_sites(p2)

    @property
    def taxel_count(self) -> int:
        return len(self.positions_2d)

    @property
    def bounds(self):
        """(umin, vmin, umax, vmax) of the 2D sites."""
        lo = self.positions_2d.min(axis=0)
        hi = self.positions_2d.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def width(self) -> float:
        umin, _, umax, _ = self.bounds
        return umax - umin

    def __eq__(self, other):
        if not isinstance(other, SensorLayout):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.positions_3d, other.positions_3d)
            and np.array_equal(self.positions_2d, other.positions_2d)
        )

    __hash__ = None

    @classmethod
    def from_2d(cls, points, name="synthetic"):
        """Layout whose 3D positions are the 2D points lifted to z=0."""
        p2 = np.asarray(points, dtype=float)
        p3 = np.column_stack([p2, np.zeros(len(p2))])
        return cls(p3, p2, name)


def _check_sites(p2):
    n = len(p2)
    if n < 3:
        raise GeometryError(f"need at least 3 sites for a triangulation, got {n}")
    diff = p2[:, None, :] - p2[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    dist[np.diag_indices(n)] = np.inf
    if dist.min() <= MIN_SITE_SEPARATION:
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        raise GeometryError(f"sites {min(i, j)} and {max(i, j)} coincide")
    # collinearity relative to the layout scale
    d = p2 - p2[0]
    scale = float(np.abs(d).max())
    k = int(np.argmax((d**2).sum(axis=1)))
    cross = d[k, 0] * d[:, 1] - d[k, 1] * d[:, 0]
    if np.abs(cross).max() <= 1e-12 * scale * scale:
        raise GeometryError("all sites are collinear")


def load_layout(source: str) -> SensorLayout:
    """Parse a JSON layout document with ``name``, ``positions_3d``, ``positions_2d``."""
    try:
        doc = json.loads(source)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"layout is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("layout document must be a JSON object")
    for key in ("positions_3d", "positions_2d"):
        if key not in doc:
            raise ParseError(f"layout document lacks key {key!r}")
    p3, p2 = doc["positions_3d"], doc["positions_2d"]
    for key, rows, width in (("positions_3d", p3, 3), ("positions_2d", p2, 2)):
        if not isinstance(rows, list) or not all(
            isinstance(r, list)
            and len(r) == width
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r)
            for r in rows
        ):
            raise ParseError(f"{key} must be a list of {width}-element number arrays")
    if len(p3) != len(p2):
        raise CountError(f"positions_3d has {len(p3)} entries but positions_2d has {len(p2)}")
    if len(p2) == 0:
        raise GeometryError("layout has no sites")
    return SensorLayout(
        np.array(p3, dtype=float).reshape(-1, 3),
        np.array(p2, dtype=float).reshape(-1, 2),
        str(doc.get("name", "layout")),
    )


def serialize_layout(layout: SensorLayout) -> str:
    doc = {
        "name": layout.name,
        "positions_3d": layout.positions_3d.tolist(),
        "positions_2d": layout.positions_2d.tolist(),
    }
    return json.dumps(doc, indent=1) + "\n"


def default_layout() -> SensorLayout:
    """The bundled 24-taxel layout.

    Its coordinates are a cylindrical unwrap invented for demonstration;
    they do not describe any real sensor's electrode positions.
    """
    text = resources.files("gradtac.data").joinpath("default_layout.json").read_text("utf-8")
    return load_layout(text)


@dataclass(frozen=True, eq=False)
class TaxelFrame:
    """One timestamped packet of raw taxel values."""

    timestamp: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "timestamp", float(self.timestamp))
        v = np.array(self.values, dtype=float, copy=True).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, TaxelFrame):
            return NotImplemented
        return self.timestamp == other.timestamp and np.array_equal(self.values, other.values)

    __hash__ = None

    def __len__(self):
        return len(self.values)


def frames_to_array(frames: Sequence[TaxelFrame]):
    """Stack frames into ``(timestamps, values)`` arrays of shape (T,) and (T, N)."""
    if not frames:
        return np.zeros(0), np.zeros((0, 0))
    t = np.array([f.timestamp for f in frames])
    x = np.vstack([f.values for f in frames])
    return t, x


def frames_from_array(timestamps, values):
    return [TaxelFrame(float(t), row) for t, row in zip(timestamps, np.asarray(values))]


def validate_stream(frames: Sequence[TaxelFrame], taxel_count: int | None = None):
    """Drop frames that break strict time monotonicity or carry non-finite values.

    Returns ``(kept_frames, dropped_count)``.  A frame whose length differs
    from ``taxel_count`` (or from the first frame when not given) raises
    :class:`CountError` since that is a schema problem, not a glitch.
    """
    kept = []
    dropped = 0
    last_t = -math.inf
    for f in frames:
        n = taxel_count if taxel_count is not None else (len(kept[0]) if kept else len(f))
        if len(f) != n:
            raise CountError(f"frame at t={f.timestamp} has {len(f)} values, expected {n}")
        if not math.isfinite(f.timestamp) or f.timestamp <= last_t or not np.all(np.isfinite(f.values)):
            dropped += 1
            continue
        kept.append(f)
        last_t = f.timestamp
    if not kept:
        raise EmptyStream("no frame survived validation")
    return kept, dropped


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable parameters of the event -> surface -> contour -> track pipeline."""

    tau: float = 0.01
    agg_window: float = 0.05
    grid_cols: int = 64
    grid_rows: int = 48
    contour_levels: int = 10
    min_events: int = 3
    smoothing_alpha: float = 1.0
    carry_over: bool = False
    signed: bool = False
    savgol_window: int = 7
    savgol_order: int = 3
    smooth: bool = True
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (self.agg_window > 0 and math.isfinite(self.agg_window)):
            raise ValueError(f"agg_window must be positive, got {self.agg_window}")
        if self.grid_cols < 8 or self.grid_rows < 8:
            raise ValueError(f"grid must be at least 8x8, got {self.grid_cols}x{self.grid_rows}")
        if self.contour_levels < 2:
            raise ValueError("contour_levels must be >= 2")
        if self.min_events < 0:
            raise ValueError("min_events must be non-negative")
        if not 0.0 <= self.smoothing_alpha <= 1.0:
            raise ValueError("smoothing_alpha must lie in [0, 1]")
