"""Iso-contours of event surfaces, touch-region selection and tracking."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegeneratePolygon

__all__ = [
    "ContourSet",
    "TouchContour",
    "TrackPoint",
    "Trajectory",
    "contour_levels",
    "extract_contours",
    "extract_level",
    "select_touch_region",
    "centroid_area",
    "points_in_polygon",
    "track",
]

MIN_AREA = 1e-9

# Edge codes inside a cell: 0 top (tl-tr), 1 right (tr-br), 2 bottom (bl-br), 3 left (tl-bl).
# Corner bits: tl=8, tr=4, br=2, bl=1.
_SEGMENTS = {
    1: ((3, 2),),
    2: ((2, 1),),
    3: ((3, 1),),
    4: ((0, 1),),
    6: ((0, 2),),
    7: ((3, 0),),
    8: ((3, 0),),
    9: ((0, 2),),
    11: ((0, 1),),
    12: ((3, 1),),
    13: ((2, 1),),
    14: ((3, 2),),
}
# saddles: (centre above level, centre below level)
_SADDLES = {
    5: (((3, 0), (2, 1)), ((3, 2), (0, 1))),
    10: (((0, 1), (3, 2)), ((3, 0), (2, 1))),
}


def centroid_area(polygon):
    """Area-weighted centroid and absolute shoelace area of a simple polygon."""
    p = np.asarray(polygon, dtype=float)
    if len(p) >= 2 and np.array_equal(p[0], p[-1]):
        p = p[:-1]
    if len(p) < 3:
        raise DegeneratePolygon(f"polygon has {len(p)} distinct vertices")
    # shift to the first vertex to limit cancellation far from the origin
    o = p[0]
    x = p[:, 0] - o[0]
    y = p[:, 1] - o[1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    a2 = cross.sum()
    if abs(a2) * 0.5 < MIN_AREA:
        raise DegeneratePolygon(f"polygon area {abs(a2) * 0.5:.3g} below {MIN_AREA}")
    cx = ((x + xn) * cross).sum() / (3.0 * a2)
    cy = ((y + yn) * cross).sum() / (3.0 * a2)
    return (float(cx + o[0]), float(cy + o[1])), float(abs(a2) * 0.5)


def points_in_polygon(points, polygon):
    """Even-odd ray casting; boolean array over ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polygon, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for a, b, c, d in zip(x0, y0, x1, y1):
        if b == d:
            continue
        crosses = (b > y) != (d > y)
        xi = a + (y - b) * (c - a) / (d - b)
        inside ^= crosses & (x < xi)
    return inside


def contour_levels(vmax, count):
    """``count`` equally spaced levels in ``(0, vmax]``."""
    return [vmax * k / count for k in range(1, count + 1)]


def extract_level(surface, level):
    """Closed polygons bounding ``{value > level}`` at one level.

    Nodes outside the hull (and a virtual border around the raster) count
    as below every level; crossings towards such nodes are pinned to the
    last in-hull node so contours close along the mask edge.
    """
    vals = np.asarray(surface.values, dtype=float)
    mask = np.asarray(surface.mask, dtype=bool)
    rows, cols = vals.shape
    V = np.zeros((rows + 2, cols + 2))
    V[1:-1, 1:-1] = vals
    M = np.ones((rows + 2, cols + 2), dtype=bool)
    M[1:-1, 1:-1] = mask
    above = (V > level) & ~M
    case = (
        above[:-1, :-1] * 8
        + above[:-1, 1:] * 4
        + above[1:, 1:] * 2
        + above[1:, :-1] * 1
    )
    active = np.argwhere((case > 0) & (case < 15))
    if active.size == 0:
        return []

    u, v = surface.u, surface.v
    du = u[1] - u[0]
    dv = v[1] - v[0]

    def node_xy(r, c):
        return u[0] + (c - 1) * du, v[0] + (r - 1) * dv

    def vertex(edge_key):
        kind, r, c = edge_key
        r2, c2 = (r, c + 1) if kind == 0 else (r + 1, c)
        m1, m2 = M[r, c], M[r2, c2]
        if m1:
            return node_xy(r2, c2)
        if m2:
            return node_xy(r, c)
        v1, v2 = V[r, c], V[r2, c2]
        t = (level - v1) / (v2 - v1)
        x1, y1 = node_xy(r, c)
        x2, y2 = node_xy(r2, c2)
        return x1 + t * (x2 - x1), y1 + t * (y2 - y1)

    def edge_key(r, c, e):
        # 0: horizontal edge starting at node (r, c); 1: vertical edge
        if e == 0:
            return (0, r, c)
        if e == 1:
            return (1, r, c + 1)
        if e == 2:
            return (0, r + 1, c)
        return (1, r, c)

    links = {}
    for r, c in active.tolist():
        k = int(case[r, c])
        if k in _SADDLES:
            centre = 0.25 * (V[r, c] + V[r, c + 1] + V[r + 1, c] + V[r + 1, c + 1])
            segs = _SADDLES[k][0 if centre > level else 1]
        else:
            segs = _SEGMENTS[k]
        for e1, e2 in segs:
            a = edge_key(r, c, e1)
            b = edge_key(r, c, e2)
            links.setdefault(a, []).append(b)
            links.setdefault(b, []).append(a)

    polygons = []
    seen = set()
    for start in links:
        if start in seen:
            continue
        ring = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nbrs = links[cur]
            nxt = nbrs[0] if nbrs[0] != prev else (nbrs[1] if len(nbrs) > 1 else nbrs[0])
            if nxt == start or nxt in seen:
                break
            ring.append(nxt)
            seen.add(nxt)
            prev, cur = cur, nxt
        pts = []
        for key in ring:
            p = vertex(key)
            if not pts or p != pts[-1]:
                pts.append(p)
        while len(pts) > 1 and pts[0] == pts[-1]:
            pts.pop()
        if len(pts) < 3:
            continue
        poly = np.array(pts)
        try:
            centroid_area(poly)
        except DegeneratePolygon:
            continue
        polygons.append(poly)
    return polygons


@dataclass(frozen=True)
class ContourSet:
    """Polygons per level; ``levels[i]`` pairs with ``polygons[i]``."""

    levels: tuple
    polygons: tuple

    def __len__(self):
        return sum(len(p) for p in self.polygons)

    @property
    def empty(self):
        return len(self) == 0


def extract_contours(surface, levels=10) -> ContourSet:
    """Marching-squares contours at ``levels`` equally spaced values up to the maximum."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    vmax = surface.max()
    if not vmax > 0:
        return ContourSet((), ())
    lv = contour_levels(vmax, levels)
    return ContourSet(tuple(lv), tuple(tuple(extract_level(surface, L)) for L in lv))


class TouchContour(NamedTuple):
    level: float
    polygon: np.ndarray
    centroid: tuple
    area: float
    peak: float


def _node_coords(surface):
    uu, vv = np.meshgrid(surface.u, surface.v)
    return uu, vv


def _peak_inside(surface, polygon):
    uu, vv = _node_coords(surface)
    lo = polygon.min(axis=0)
    hi = polygon.max(axis=0)
    box = (uu >= lo[0]) & (uu <= hi[0]) & (vv >= lo[1]) & (vv <= hi[1]) & ~surface.mask
    idx = np.flatnonzero(box)
    if idx.size == 0:
        return 0.0
    pts = np.column_stack([uu.ravel()[idx], vv.ravel()[idx]])
    inside = points_in_polygon(pts, polygon)
    if not inside.any():
        return 0.0
    return float(surface.values.ravel()[idx][inside].max())


def _best_polygon(surface, level, polygons):
    best = None
    best_key = None
    for poly in polygons:
        centroid, area = centroid_area(poly)
        peak = _peak_inside(surface, poly)
        key = (-peak, -area, centroid[0])
        if best_key is None or key < best_key:
            best_key = key
            best = TouchContour(level, poly, centroid, area, peak)
    return best


def select_touch_region(contours: ContourSet, frame_total_events, min_events, surface=None) -> Optional[TouchContour]:
    """The region of touch: a polygon at the highest non-empty level.

    Returns None when the frame carries fewer than ``min_events`` events.
    Several polygons at that level are ranked by enclosed peak value, then
    area, then lowest centroid u.  ``surface`` supplies the peak values; it
    is required when the top level holds more than one polygon.
    """
    if frame_total_events < min_events:
        return None
    for level, polys in zip(reversed(contours.levels), reversed(contours.polygons)):
        if not polys:
            continue
        if len(polys) > 1 and surface is None:
            raise ValueError("surface needed to rank several candidate polygons")
        if surface is None:
            c, a = centroid_area(polys[0])
            return TouchContour(level, polys[0], c, a, float("nan"))
        return _best_polygon(surface, level, polys)
    return None


def touch_region(surface, levels, frame_total_events, min_events):
    """Same result as ``select_touch_region(extract_contours(surface, levels), ...)``.

    Walks levels downward and stops at the first non-empty one, so only
    the levels that matter are contoured.
    """
    if frame_total_events < min_events:
        return None
    vmax = surface.max()
    if not vmax > 0:
        return None
    for level in reversed(contour_levels(vmax, levels)):
        polys = extract_level(surface, level)
        if polys:
            return _best_polygon(surface, level, polys)
    return None


class TrackPoint(NamedTuple):
    window_start: float
    centroid: Optional[tuple]
    area: float
    level: float
    gap: bool


class Trajectory(list):
    """Time-ordered list of :class:`TrackPoint`."""

    def centroids(self):
        """(T, 2) array with NaN rows at gaps."""
        out = np.full((len(self), 2), np.nan)
        for i, p in enumerate(self):
            if not p.gap:
                out[i] = p.centroid
        return out

    def times(self):
        return np.array([p.window_start for p in self])

    def contact_points(self):
        return [p for p in self if not p.gap]


def _gap(frame):
    return TrackPoint(frame.window_start, None, 0.0, 0.0, True)


def track(surfaces, config) -> Trajectory:
    """Fold a time-ordered sequence of ``(EventFrame, EventSurface)`` into a trajectory.

    Centroids are exponentially smoothed with ``config.smoothing_alpha``
    (1 disables smoothing); smoothing restarts after every gap.
    """
    alpha = config.smoothing_alpha
    out = Trajectory()
    state = None
    last_t = -np.inf
    for frame, surface in surfaces:
        if frame.window_start <= last_t:
            raise ValueError("surfaces must be strictly time ordered")
        last_t = frame.window_start
        region = touch_region(surface, config.contour_levels, frame_total(frame), config.min_events)
        if region is None:
            out.append(_gap(frame))
            state = None
            continue
        c = np.array(region.centroid)
        state = c if state is None else alpha * c + (1.0 - alpha) * state
        out.append(TrackPoint(frame.window_start, (float(state[0]), float(state[1])), region.area, region.level, False))
    return out


def frame_total(frame):
    """Gate statistic: event count, or summed activity for count-free frames."""
    total = frame.total_events
    if total == 0 and np.any(frame.activity):
        return float(np.abs(frame.activity).sum())
    return total
