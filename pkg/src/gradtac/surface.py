"""Delaunay/Voronoi structure over the taxel layout and Sibson interpolation.

Natural-neighbour (Sibson) weights are computed geometrically: the query
point is virtually inserted into the Delaunay triangulation (Bowyer-Watson
cavity), and each natural neighbour's weight is the area its Voronoi cell
loses to the query's new cell.  The shared triangulation is never mutated;
every query works on its own scratch lists.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, OutsideHull

__all__ = [
    "Triangulation",
    "EventSurface",
    "triangulate",
    "nn_weights",
    "interpolate_grid",
    "grid_nodes",
    "weight_matrix",
    "convex_hull",
    "circumcircle",
]

log = logging.getLogger(__name__)

PAD_FRACTION = 0.10


def orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def incircle(a, b, c, d):
    """Positive when d lies inside the circumcircle of CCW triangle abc."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (
        adx * (bdy * cd - bd * cdy)
        - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx)
    )


def circumcircle(a, b, c):
    """Circumcentre and squared radius of triangle abc."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        raise GeometryError("degenerate triangle has no circumcircle")
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return (ux, uy), (ax - ux) ** 2 + (ay - uy) ** 2


def convex_hull(points):
    """Indices of the convex hull in CCW order (Andrew's monotone chain)."""
    pts = np.asarray(points, dtype=float)
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))
    if len(order) < 3:
        return order

    def chain(idx):
        out = []
        for i in idx:
            while len(out) >= 2 and orient(pts[out[-2]], pts[out[-1]], pts[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(order[::-1])
    return lower[:-1] + upper[:-1]


def _bowyer_watson(pts, super_scale):
    n = len(pts)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    center = (lo + hi) / 2.0
    span = float(max(hi - lo)) or 1.0
    r = super_scale * span
    work = np.vstack(
        [
            pts,
            center + [-2 * r, -r],
            center + [2 * r, -r],
            center + [0.0, 2 * r],
        ]
    )
    tris = [(n, n + 1, n + 2)]
    for i in range(n):
        p = work[i]
        bad = [t for t in tris if incircle(work[t[0]], work[t[1]], work[t[2]], p) > 0]
        if not bad:
            raise GeometryError(f"site {i} fell outside every circumcircle")
        edges = {}
        for a, b, c in bad:
            for e in ((a, b), (b, c), (c, a)):
                edges[e] = True
        boundary = [e for e in edges if (e[1], e[0]) not in edges]
        bad_set = set(bad)
        tris = [t for t in tris if t not in bad_set]
        for a, b in boundary:
            tris.append((a, b, i))
    return [t for t in tris if max(t) < n]


def _canonical(t):
    # rotate so the smallest index comes first, keeping orientation
    k = t.index(min(t))
    return t[k:] + t[:k]


def _tie_break_flips(pts, tris, tol):
    """Resolve cocircular quads towards the diagonal with the lowest indices."""
    tris = [_canonical(t) for t in tris]
    for _ in range(4 * len(tris) + 10):
        owner = {}
        for ti, (a, b, c) in enumerate(tris):
            owner[(a, b)] = ti
            owner[(b, c)] = ti
            owner[(c, a)] = ti
        changed = False
        for (a, b), ti in owner.items():
            tj = owner.get((b, a))
            if tj is None or ti > tj:
                continue
            c = [v for v in tris[ti] if v not in (a, b)][0]
            d = [v for v in tris[tj] if v not in (a, b)][0]
            # triangle (a, b, c) CCW; d opposite across edge ab
            val = incircle(pts[a], pts[b], pts[c], pts[d])
            scale = float(np.abs(pts[[a, b, c, d]] - pts[a]).max()) ** 4 or 1.0
            if abs(val) > tol * scale:
                continue
            if tuple(sorted((c, d))) >= tuple(sorted((a, b))):
                continue
            if orient(pts[c], pts[d], pts[a]) * orient(pts[c], pts[d], pts[b]) >= 0:
                continue  # quad not strictly convex
            t1 = (c, a, d) if orient(pts[c], pts[a], pts[d]) > 0 else (c, d, a)
            t2 = (c, d, b) if orient(pts[c], pts[d], pts[b]) > 0 else (c, b, d)
            tris[ti] = _canonical(t1)
            tris[tj] = _canonical(t2)
            changed = True
            break
        if not changed:
            return sorted(tris)
    log.warning("cocircular tie-break did not settle; keeping current diagonals")
    return sorted(tris)


def _clip_halfplane(poly, normal, offset):
    # keep points with normal . p <= offset
    out = []
    m = len(poly)
    for k in range(m):
        p = poly[k]
        q = poly[(k + 1) % m]
        fp = normal[0] * p[0] + normal[1] * p[1] - offset
        fq = normal[0] * q[0] + normal[1] * q[1] - offset
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def _shoelace(poly):
    a = 0.0
    m = len(poly)
    for k in range(m):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % m]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Delaunay triangles over the layout's 2D sites and their clipped Voronoi cells."""

    sites: np.ndarray
    triangles: np.ndarray
    hull: tuple
    cells: tuple
    box: tuple
    centers: np.ndarray = field(repr=False)
    radii2: np.ndarray = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def site_count(self) -> int:
        return len(self.sites)

    @property
    def scale(self) -> float:
        return float(np.ptp(self.sites, axis=0).max())

    def contains(self, q, strict=True):
        """Whether ``q`` lies inside the convex hull (strictly by default)."""
        tol = 1e-12 * self.scale**2
        h = self.hull
        for k in range(len(h)):
            a = self.sites[h[k]]
            b = self.sites[h[(k + 1) % len(h)]]
            o = orient(a, b, q)
            if o < tol if strict else o < -tol:
                return False
        return True

    def contains_many(self, q, strict=True):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        tol = 1e-12 * self.scale**2
        inside = np.ones(len(q), dtype=bool)
        h = self.hull
        for k in range(len(h)):
            a = self.sites[h[k]]
            b = self.sites[h[(k + 1) % len(h)]]
            o = (b[0] - a[0]) * (q[:, 1] - a[1]) - (b[1] - a[1]) * (q[:, 0] - a[0])
            inside &= (o >= tol) if strict else (o >= -tol)
        return inside


def triangulate(layout_or_points, tie_tol=1e-10) -> Triangulation:
    """Delaunay triangulation with deterministic cocircular tie-breaks.

    Accepts a :class:`~gradtac.geometry.SensorLayout` or an (n, 2) array.
    Voronoi cells are clipped to the sites' bounding box padded by 10% of
    its extent on every side.
    """
    pts = getattr(layout_or_points, "positions_2d", layout_or_points)
    pts = np.array(pts, dtype=float)
    n = len(pts)
    if n < 3:
        raise GeometryError(f"need at least 3 sites, got {n}")
    hull = convex_hull(pts)
    if len(hull) < 3:
        raise GeometryError("sites are collinear")
    # count of triangles in any triangulation of a planar point set, where
    # the boundary count includes sites lying on hull edges
    on_boundary = 0
    span = float(np.ptp(pts, axis=0).max())
    for i in range(n):
        for k in range(len(hull)):
            a, b = pts[hull[k]], pts[hull[(k + 1) % len(hull)]]
            if abs(orient(a, b, pts[i])) <= 1e-12 * span * span and (
                min(a[0], b[0]) - 1e-12 <= pts[i][0] <= max(a[0], b[0]) + 1e-12
                and min(a[1], b[1]) - 1e-12 <= pts[i][1] <= max(a[1], b[1]) + 1e-12
            ):
                on_boundary += 1
                break
    expected = 2 * n - 2 - on_boundary
    tris = None
    for scale in (1e3, 1e5):
        cand = _bowyer_watson(pts, scale)
        if len(cand) == expected:
            tris = cand
            break
    if tris is None:
        raise GeometryError(f"triangulation incomplete: expected {expected} triangles")
    tris = _tie_break_flips(pts, tris, tie_tol)

    centers = np.empty((len(tris), 2))
    radii2 = np.empty(len(tris))
    for k, (a, b, c) in enumerate(tris):
        centers[k], radii2[k] = circumcircle(pts[a], pts[b], pts[c])

    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = PAD_FRACTION * (hi - lo)
    box = (float(lo[0] - pad[0]), float(lo[1] - pad[1]), float(hi[0] + pad[0]), float(hi[1] + pad[1]))
    rect = [(box[0], box[1]), (box[2], box[1]), (box[2], box[3]), (box[0], box[3])]
    cells = []
    for i in range(n):
        poly = list(rect)
        for j in range(n):
            if j == i:
                continue
            normal = pts[j] - pts[i]
            offset = 0.5 * (pts[j] @ pts[j] - pts[i] @ pts[i])
            poly = _clip_halfplane(poly, normal, offset)
        if len(poly) < 3 or _shoelace(poly) <= 0:
            raise GeometryError(f"Voronoi cell of site {i} is empty after clipping")
        cells.append(tuple(poly))

    tri_arr = np.array(tris, dtype=np.int64)
    pts.setflags(write=False)
    tri_arr.setflags(write=False)
    centers.setflags(write=False)
    radii2.setflags(write=False)
    return Triangulation(pts, tri_arr, tuple(hull), tuple(cells), box, centers, radii2)


def nn_weights(tri: Triangulation, query):
    """Sibson natural-neighbour coordinates of ``query``.

    Returns ``[(site, weight), ...]`` sorted by site index.  A query on a
    site returns that site with weight 1.  Raises :class:`OutsideHull`
    unless the query is strictly inside the convex hull.
    """
    q = (float(query[0]), float(query[1]))
    sites = tri.sites
    d2 = (sites[:, 0] - q[0]) ** 2 + (sites[:, 1] - q[1]) ** 2
    k = int(np.argmin(d2))
    if d2[k] <= (1e-12 * tri.scale) ** 2:
        return [(k, 1.0)]
    if not tri.contains(q):
        raise OutsideHull(f"query {q} is not strictly inside the convex hull")

    dc = (tri.centers[:, 0] - q[0]) ** 2 + (tri.centers[:, 1] - q[1]) ** 2
    cavity = np.flatnonzero(dc < tri.radii2)
    if cavity.size == 0:
        raise GeometryError(f"no circumcircle contains {q}")

    tris = tri.triangles
    # directed edge -> cavity triangle owning it
    owner = {}
    for t in cavity.tolist():
        a, b, c = tris[t].tolist()
        owner[(a, b)] = t
        owner[(b, c)] = t
        owner[(c, a)] = t
    nxt = {}
    prv = {}
    for (a, b) in owner:
        if (b, a) not in owner:
            nxt[a] = b
            prv[b] = a

    def cc(a, b):
        return circumcircle(q, sites[a], sites[b])[0]

    out = []
    total = 0.0
    for i in sorted(nxt):
        p, nn = prv[i], nxt[i]
        poly = [cc(p, i)]
        t = owner[(p, i)]
        for _ in range(len(cavity) + 1):
            poly.append(tuple(tri.centers[t]))
            a, b, c = tris[t].tolist()
            # the vertex following i inside this CCW triangle
            after = b if a == i else (c if b == i else a)
            if after == nn:
                break
            t = owner[(after, i)]
        else:
            raise GeometryError("cavity fan around a neighbour did not close")
        poly.append(cc(i, nn))
        area = abs(_shoelace(poly))
        out.append((i, area))
        total += area
    if not total > 0:
        raise GeometryError(f"virtual insertion of {q} stole no area")
    return [(i, a / total) for i, a in out]


def grid_nodes(tri: Triangulation, cols: int, rows: int):
    """Node coordinates ``(u, v)`` of a cols x rows raster over the hull's bounding box."""
    lo = tri.sites.min(axis=0)
    hi = tri.sites.max(axis=0)
    u = np.linspace(lo[0], hi[0], cols)
    v = np.linspace(lo[1], hi[1], rows)
    return u, v


def weight_matrix(tri: Triangulation, cols: int, rows: int):
    """Sparse-in-spirit dense matrix mapping site values to grid node values.

    Shape is ``(rows * cols, sites)``; masked nodes have all-zero rows.
    Cached on the triangulation since it depends on geometry only.
    """
    key = ("w", cols, rows)
    hit = tri._cache.get(key)
    if hit is not None:
        return hit
    u, v = grid_nodes(tri, cols, rows)
    uu, vv = np.meshgrid(u, v)
    nodes = np.column_stack([uu.ravel(), vv.ravel()])
    W = np.zeros((len(nodes), tri.site_count))
    sites = tri.sites
    on_site = np.zeros(len(nodes), dtype=bool)
    for s in range(tri.site_count):
        hit_nodes = np.flatnonzero(
            (nodes[:, 0] - sites[s, 0]) ** 2 + (nodes[:, 1] - sites[s, 1]) ** 2 <= (1e-12 * tri.scale) ** 2
        )
        on_site[hit_nodes] = True
    inside = tri.contains_many(nodes) | on_site
    for r in np.flatnonzero(inside):
        for s, w in nn_weights(tri, nodes[r]):
            W[r, s] = w
    mask = ~inside.reshape(rows, cols)
    W.setflags(write=False)
    mask.setflags(write=False)
    tri._cache[key] = (W, mask)
    return W, mask


@dataclass(frozen=True, eq=False)
class EventSurface:
    """Raster of interpolated activity; ``mask`` is True outside the hull."""

    values: np.ndarray
    mask: np.ndarray
    u: np.ndarray
    v: np.ndarray
    window_start: float = 0.0
    window_end: float = 0.0

    @property
    def shape(self):
        return self.values.shape

    @property
    def domain(self):
        return float(self.u[0]), float(self.v[0]), float(self.u[-1]), float(self.v[-1])

    def max(self) -> float:
        vals = self.values[~self.mask]
        return float(vals.max()) if vals.size else 0.0


def interpolate_grid(frame, tri: Triangulation, grid_cols=64, grid_rows=48) -> EventSurface:
    """Sibson-interpolate a frame's per-taxel activity onto a regular grid.

    ``frame`` may be an :class:`~gradtac.aggregate.EventFrame` or a plain
    per-site value array.
    """
    act = np.asarray(getattr(frame, "activity", frame), dtype=float)
    if act.shape != (tri.site_count,):
        raise GeometryError(f"frame has {act.shape} values but the triangulation has {tri.site_count} sites")
    W, mask = weight_matrix(tri, grid_cols, grid_rows)
    vals = (W @ act).reshape(grid_rows, grid_cols)
    vals[mask] = 0.0
    u, v = grid_nodes(tri, grid_cols, grid_rows)
    return EventSurface(
        vals,
        mask,
        u,
        v,
        float(getattr(frame, "window_start", 0.0)),
        float(getattr(frame, "window_end", 0.0)),
    )
