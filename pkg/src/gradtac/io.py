"""CSV readers/writers and a small deterministic SVG emitter.

Writers return text; readers accept text, a file object or a path.  Numbers
are printed with fixed decimals (9 for raw data and events, 6 for derived
quantities) so a read followed by a write reproduces the file byte for byte.
"""
from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np

from .contour import ContourSet, TrackPoint, Trajectory, extract_contours
from .errors import EmptyArtifact, HeaderMismatch, RowError
from .events import EventStream
from .geometry import TaxelFrame
from .surface import EventSurface

__all__ = [
    "taxel_header",
    "write_taxel_csv",
    "read_taxel_csv",
    "write_events_csv",
    "read_events_csv",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_event_frames_csv",
    "write_contours_csv",
    "write_surface_csv",
    "write_ground_truth_csv",
    "write_world_csv",
    "emit_svg",
]

EVENTS_HEADER = "timestamp,taxel,polarity"
TRAJECTORY_HEADER = "window_start,u,v,area,level,gap"


def _text(source):
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    if isinstance(source, os.PathLike):
        return Path(source).read_text(encoding="utf-8")
    return source


def _rows(source):
    """Yield ``(line_number, fields)`` for non-empty lines after the header."""
    lines = _text(source).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].strip():
        raise HeaderMismatch("missing header line")
    header = lines[0].rstrip("\r")
    body = ((i + 2, ln.rstrip("\r")) for i, ln in enumerate(lines[1:]))
    return header, ((n, ln.split(",")) for n, ln in body if ln)


def _float(text, line, what):
    try:
        x = float(text)
    except ValueError:
        raise RowError(line, f"{what} {text!r} is not a number") from None
    if not math.isfinite(x):
        raise RowError(line, f"{what} must be finite")
    return x


def _int(text, line, what):
    try:
        return int(text)
    except ValueError:
        raise RowError(line, f"{what} {text!r} is not an integer") from None


def _join(lines):
    return "\n".join(lines) + "\n"


# -- taxel recordings ------------------------------------------------------


def taxel_header(n):
    width = max(2, len(str(n)))
    return "timestamp," + ",".join(f"e{j:0{width}d}" for j in range(1, n + 1))


def write_taxel_csv(frames):
    frames = list(frames)
    if not frames:
        raise EmptyArtifact("no frames to write")
    n = len(frames[0].values)
    out = [taxel_header(n)]
    for f in frames:
        out.append(f"{f.timestamp:.9f}," + ",".join(f"{x:.9f}" for x in f.values))
    return _join(out)


def read_taxel_csv(source):
    """Parse a taxel recording; returns ``(frames, taxel_count)``."""
    header, rows = _rows(source)
    cols = header.split(",")
    n = len(cols) - 1
    if n < 1 or header != taxel_header(n):
        raise HeaderMismatch(f"expected 'timestamp,e01,...', got {header[:60]!r}")
    frames = []
    for line, fields in rows:
        if len(fields) != n + 1:
            raise RowError(line, f"expected {n + 1} fields, got {len(fields)}")
        t = _float(fields[0], line, "timestamp")
        vals = np.array([_float(x, line, "value") for x in fields[1:]])
        frames.append(TaxelFrame(t, vals))
    return frames, n


# -- events ----------------------------------------------------------------


def write_events_csv(stream):
    out = [EVENTS_HEADER]
    out.extend(
        f"{t:.9f},{k},{p}" for t, k, p in zip(stream.timestamps.tolist(), stream.taxels.tolist(), stream.polarities.tolist())
    )
    return _join(out)


def read_events_csv(source, tau=float("nan")):
    header, rows = _rows(source)
    if header != EVENTS_HEADER:
        raise HeaderMismatch(f"expected {EVENTS_HEADER!r}, got {header[:60]!r}")
    ts, ks, ps = [], [], []
    for line, fields in rows:
        if len(fields) != 3:
            raise RowError(line, f"expected 3 fields, got {len(fields)}")
        t = _float(fields[0], line, "timestamp")
        k = _int(fields[1], line, "taxel")
        p = _int(fields[2], line, "polarity")
        if k < 0:
            raise RowError(line, "taxel index must be non-negative")
        if p not in (1, -1):
            raise RowError(line, f"polarity must be +1 or -1, got {p}")
        if ts and t < ts[-1]:
            raise RowError(line, "timestamps must be non-decreasing")
        ts.append(t)
        ks.append(k)
        ps.append(p)
    return EventStream(np.array(ts, dtype=float), np.array(ks, dtype=np.int64), np.array(ps, dtype=np.int8), tau)


# -- trajectories ----------------------------------------------------------


def write_trajectory_csv(traj):
    out = [TRAJECTORY_HEADER]
    for p in traj:
        if p.gap:
            out.append(f"{p.window_start:.6f},,,{0.0:.6f},{0.0:.6f},1")
        else:
            u, v = p.centroid
            out.append(f"{p.window_start:.6f},{u:.6f},{v:.6f},{p.area:.6f},{p.level:.6f},0")
    return _join(out)


def read_trajectory_csv(source):
    header, rows = _rows(source)
    if header != TRAJECTORY_HEADER:
        raise HeaderMismatch(f"expected {TRAJECTORY_HEADER!r}, got {header[:60]!r}")
    traj = Trajectory()
    for line, fields in rows:
        if len(fields) != 6:
            raise RowError(line, f"expected 6 fields, got {len(fields)}")
        gap = fields[5]
        if gap not in ("0", "1"):
            raise RowError(line, f"gap must be 0 or 1, got {gap!r}")
        t = _float(fields[0], line, "window_start")
        if gap == "1":
            if fields[1] or fields[2]:
                raise RowError(line, "gap rows must leave u and v empty")
            traj.append(TrackPoint(t, None, 0.0, 0.0, True))
        else:
            u = _float(fields[1], line, "u")
            v = _float(fields[2], line, "v")
            traj.append(TrackPoint(t, (u, v), _float(fields[3], line, "area"), _float(fields[4], line, "level"), False))
    return traj


# -- derived artifacts (write only) ----------------------------------------


def write_event_frames_csv(frames):
    """``window_start,taxel,pos,neg``, one row per taxel per window."""
    out = ["window_start,taxel,pos,neg"]
    for f in frames:
        for k in range(f.taxel_count):
            out.append(f"{f.window_start:.6f},{k},{int(f.pos_counts[k])},{int(f.neg_counts[k])}")
    return _join(out)


def write_contours_csv(items):
    """``window_start,level,polygon,vertex,u,v`` for ``(window_start, ContourSet)`` pairs."""
    out = ["window_start,level,polygon,vertex,u,v"]
    for t, cs in items:
        for level, polys in zip(cs.levels, cs.polygons):
            for i, poly in enumerate(polys):
                for j, (u, v) in enumerate(poly):
                    out.append(f"{t:.6f},{level:.6f},{i},{j},{u:.6f},{v:.6f}")
    return _join(out)


def write_surface_csv(surface):
    """``row,col,u,v,value`` over unmasked grid nodes, row-major."""
    out = ["row,col,u,v,value"]
    for r, v in enumerate(surface.v):
        for c, u in enumerate(surface.u):
            if not surface.mask[r, c]:
                out.append(f"{r},{c},{u:.6f},{v:.6f},{surface.values[r, c]:.6f}")
    return _join(out)


def write_ground_truth_csv(truth):
    out = ["timestamp,cu,cv,force,contact"]
    for t, (u, v), f, c in zip(truth.timestamps, truth.contact_points, truth.force, truth.contact):
        out.append(f"{t:.9f},{u:.9f},{v:.9f},{f:.9f},{int(bool(c))}")
    return _join(out)


def write_world_csv(rows):
    """Finger trajectory ``t,x,y,heading`` from an ``(n, 4)`` array."""
    out = ["t,x,y,heading"]
    out.extend(f"{t:.6f},{x:.6f},{y:.6f},{h:.6f}" for t, x, y, h in np.asarray(rows, dtype=float))
    return _join(out)


# -- SVG -------------------------------------------------------------------

DEFAULT_STYLE = {
    "scale": 10.0,  # px per mm
    "margin": 2.0,  # mm
    "stroke": "#202020",
    "track": "#c0392b",
    "fill_low": (230, 240, 250),
    "fill_high": (20, 60, 140),
    "levels": 10,
}


def _ramp(style, k, n):
    lo, hi = style["fill_low"], style["fill_high"]
    s = 0.0 if n <= 1 else k / (n - 1)
    r, g, b = (round(a + s * (c - a)) for a, c in zip(lo, hi))
    return f"#{r:02x}{g:02x}{b:02x}"


class _Canvas:
    def __init__(self, box, style):
        umin, vmin, umax, vmax = box
        m = style["margin"]
        self.u0, self.v1 = umin - m, vmax + m
        self.s = style["scale"]
        self.w = (umax - umin + 2 * m) * self.s
        self.h = (vmax - vmin + 2 * m) * self.s

    def pts(self, arr):
        return " ".join(f"{(u - self.u0) * self.s:.2f},{(self.v1 - v) * self.s:.2f}" for u, v in arr)

    def doc(self, body):
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.2f}" height="{self.h:.2f}" '
            f'viewBox="0 0 {self.w:.2f} {self.h:.2f}">\n'
        )
        return head + "".join(body) + "</svg>\n"


def _contour_groups(cv, cs, style):
    body = []
    n = len(cs.levels)
    for k, (level, polys) in enumerate(zip(cs.levels, cs.polygons)):
        body.append(f'<g class="level" data-level="{level:.6f}" fill="{_ramp(style, k, n)}" stroke="{style["stroke"]}" stroke-width="0.5">\n')
        for poly in polys:
            body.append(f'<polygon points="{cv.pts(poly)}"/>\n')
        body.append("</g>\n")
    return body


def _box_of(arrays):
    pts = np.vstack([np.asarray(a, dtype=float).reshape(-1, 2) for a in arrays])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return lo[0], lo[1], hi[0], hi[1]


def emit_svg(artifact, style=None, box=None):
    """Render an EventSurface, Trajectory or ContourSet as a standalone SVG.

    Surfaces are contoured at ``style["levels"]`` levels and drawn as one
    ``<g class="level">`` per level; trajectories become a single polyline
    through their contact points.  ``box=(umin, vmin, umax, vmax)`` fixes
    the drawing extent.
    """
    st = dict(DEFAULT_STYLE)
    st.update(style or {})
    if isinstance(artifact, EventSurface):
        if not artifact.max() > 0:
            raise EmptyArtifact("surface has no positive values")
        cs = extract_contours(artifact, st["levels"])
        cv = _Canvas(box or (artifact.u[0], artifact.v[0], artifact.u[-1], artifact.v[-1]), st)
        return cv.doc(_contour_groups(cv, cs, st))
    if isinstance(artifact, ContourSet):
        if artifact.empty:
            raise EmptyArtifact("contour set holds no polygons")
        cv = _Canvas(box or _box_of([p for ps in artifact.polygons for p in ps]), st)
        return cv.doc(_contour_groups(cv, artifact, st))
    if isinstance(artifact, Trajectory) or (isinstance(artifact, list) and all(isinstance(p, TrackPoint) for p in artifact)):
        pts = [p.centroid for p in artifact if not p.gap]
        if not pts:
            raise EmptyArtifact("trajectory has no contact points")
        cv = _Canvas(box or _box_of([pts]), st)
        body = [f'<polyline class="track" fill="none" stroke="{st["track"]}" stroke-width="1.5" points="{cv.pts(pts)}"/>\n']
        return cv.doc(body)
    raise TypeError(f"cannot render {type(artifact).__name__}")
