"""Downstream uses of contact trajectories: slip, force from area, edge servoing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .aggregate import aggregate
from .contour import touch_region
from .errors import InsufficientData, LengthMismatch, LostEdge, MissingSlip, NonConvergence
from .events import stream_events
from .geometry import PipelineConfig, SensorLayout, TaxelFrame, default_layout
from .surface import interpolate_grid, triangulate

__all__ = [
    "MountingTransform",
    "SlipReport",
    "centroid_velocities",
    "detect_slip",
    "classify_slip",
    "raw_slope_series",
    "detect_slip_raw",
    "SlipCase",
    "scripted_slip",
    "press_area",
    "ForceSample",
    "ForceModel",
    "fit_force_model",
    "map_error",
    "spearman",
    "EdgeWorld",
    "ServoCommand",
    "servo_step",
    "edge_shape",
    "simulate_edge_tracking",
    "edge_progress",
    "SHAPES",
]


# --------------------------------------------------------------------------
# slip


@dataclass(frozen=True, eq=False)
class MountingTransform:
    """Maps sensor-plane velocities into the shared object frame.

    ``flip`` mirrors the sensor u axis before the rotation, for a sensor
    that faces the object from the opposite side.
    """

    matrix: np.ndarray = field(default_factory=lambda: np.eye(2))
    flip: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("mounting matrix must be 2x2")
        if np.abs(m @ m.T - np.eye(2)).max() > 1e-9:
            raise ValueError("mounting matrix must be orthonormal")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def rotation(cls, angle, flip=False):
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s], [s, c]]), flip)

    def apply(self, vel):
        v = np.array(vel, dtype=float)
        if self.flip:
            v[..., 0] = -v[..., 0]
        return v @ self.matrix.T

    def inverse(self, vel):
        v = np.asarray(vel, dtype=float) @ self.matrix
        if self.flip:
            v = v.copy()
            v[..., 0] = -v[..., 0]
        return v


class SlipReport(NamedTuple):
    slip_time: Optional[float]
    kind: str  # "none", "longitudinal" or "rotational"
    direction: Optional[str]  # "up"/"down" or "cw"/"ccw"
    confidence: float

    def to_text(self):
        lines = [
            f"slip_time={'none' if self.slip_time is None else f'{self.slip_time:.6f}'}",
            f"kind={self.kind}",
            f"direction={self.direction or 'none'}",
            f"confidence={self.confidence:.6f}",
        ]
        return "\n".join(lines) + "\n"


def centroid_velocities(traj):
    """Per-point velocity by central differences within runs of consecutive contacts.

    Returns ``(times, velocities)`` with NaN rows at gaps.  Run ends fall
    back to one-sided differences; single-point runs get NaN.
    """
    t = traj.times()
    c = traj.centroids()
    vel = np.full_like(c, np.nan)
    ok = ~np.isnan(c[:, 0])
    i = 0
    n = len(t)
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and ok[j + 1]:
            j += 1
        if j > i:
            vel[i : j + 1] = np.gradient(c[i : j + 1], t[i : j + 1], axis=0)
        i = j + 1
    return t, vel


def detect_slip(traj, v_thresh=2.0, k_sustain=3):
    """Start of the first run of ``k_sustain`` frames whose centroid speed exceeds ``v_thresh``."""
    t, vel = centroid_velocities(traj)
    if np.count_nonzero(~np.isnan(vel[:, 0])) < k_sustain:
        return None
    fast = np.linalg.norm(vel, axis=1) > v_thresh  # NaN compares False
    run = 0
    for i, f in enumerate(fast):
        run = run + 1 if f else 0
        if run >= k_sustain:
            return float(t[i - k_sustain + 1])
    return None


def _mean_velocity_after(traj, t_slip):
    # least-squares slope of the centroid over the post-slip contacts; the
    # mean of central differences telescopes to the two end points, which
    # snap between taxels
    t = traj.times()
    c = traj.centroids()
    sel = (t >= t_slip - 1e-12) & ~np.isnan(c[:, 0])
    if sel.sum() < 2:
        return np.zeros(2)
    return np.polyfit(t[sel], c[sel], 1)[0]


def classify_slip(traj_a, traj_b, mounts, theta=0.5, v_thresh=2.0, k_sustain=3):
    """Longitudinal vs rotational slip from two opposing sensors.

    Post-slip mean velocities (least-squares centroid slopes) are mapped into the object frame, whose v
    axis points up.  Parallel motion is longitudinal (up or down from the
    shared v component); antiparallel motion is rotational, called ``ccw``
    when sensor A's mapped v component is positive.  Swapping A and B
    therefore keeps a longitudinal direction and flips a rotational one.
    """
    ta = detect_slip(traj_a, v_thresh, k_sustain)
    tb = detect_slip(traj_b, v_thresh, k_sustain)
    if ta is None or tb is None:
        raise MissingSlip("slip not detected on " + ("both trajectories" if ta is None and tb is None else ("A" if ta is None else "B")))
    va = mounts[0].apply(_mean_velocity_after(traj_a, ta))
    vb = mounts[1].apply(_mean_velocity_after(traj_b, tb))
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    cos = float(va @ vb / (na * nb)) if na > 0 and nb > 0 else 0.0
    t_slip = min(ta, tb)
    if cos > theta:
        shared = va[1] + vb[1]
        return SlipReport(t_slip, "longitudinal", "up" if shared > 0 else "down", abs(cos))
    if cos < -theta:
        return SlipReport(t_slip, "rotational", "ccw" if va[1] > 0 else "cw", abs(cos))
    return SlipReport(t_slip, "none", None, abs(cos))


def raw_slope_series(frames, window=10):
    """Baseline slip signal: largest per-taxel slope of a ``window``-frame linear fit.

    Returns ``(times, slopes)`` where ``times[i]`` is the last timestamp of
    the window ending at frame ``i + window - 1``.
    """
    t = np.array([f.timestamp for f in frames])
    x = np.vstack([f.values for f in frames])
    if len(t) < window:
        raise InsufficientData(f"need at least {window} frames, got {len(t)}")
    win_t = np.lib.stride_tricks.sliding_window_view(t, window)
    win_x = np.lib.stride_tricks.sliding_window_view(x, window, axis=0)  # (m, taxels, window)
    tc = win_t - win_t.mean(axis=1, keepdims=True)
    xc = win_x - win_x.mean(axis=2, keepdims=True)
    slope = (xc * tc[:, None, :]).sum(axis=2) / (tc**2).sum(axis=1)[:, None]
    return win_t[:, -1], np.abs(slope).max(axis=1)


def detect_slip_raw(frames, threshold, window=10, k_sustain=3):
    """First time the raw-slope signal stays above ``threshold`` for ``k_sustain`` windows."""
    t, s = raw_slope_series(frames, window)
    run = 0
    for i, hot in enumerate(s > threshold):
        run = run + 1 if hot else 0
        if run >= k_sustain:
            return float(t[i - k_sustain + 1])
    return None


class SlipCase(NamedTuple):
    frames_a: list
    frames_b: list
    mounts: tuple
    onset: float
    kind: str
    direction: str


_OBJECT_VELOCITY = {
    ("longitudinal", "up"): ((0.0, 1.0), (0.0, 1.0)),
    ("longitudinal", "down"): ((0.0, -1.0), (0.0, -1.0)),
    ("rotational", "ccw"): ((0.0, 1.0), (0.0, -1.0)),
    ("rotational", "cw"): ((0.0, -1.0), (0.0, 1.0)),
}


def scripted_slip(kind, direction, layout=None, seed=0, onset=1.0, duration=1.5, speed=20.0, force=4.0, snr_db=40.0):
    """Two opposing sensors gripping an object that starts slipping at ``onset``.

    Sensor A is mounted at a random in-plane angle; sensor B faces it (u
    mirrored) at another random angle.  Contact velocities are the object
    frame velocities pulled back through each mount, so a correct
    classifier sees them as parallel (longitudinal) or antiparallel
    (rotational).
    """
    from .synth import SlipPath, SynthScenario, inset_domain, synth_frames

    if (kind, direction) not in _OBJECT_VELOCITY:
        raise ValueError(f"unknown slip {kind!r}/{direction!r}")
    layout = layout or default_layout()
    rng = np.random.default_rng(seed)
    mounts = (
        MountingTransform.rotation(rng.uniform(0, 2 * math.pi)),
        MountingTransform.rotation(rng.uniform(0, 2 * math.pi), flip=True),
    )
    umin, vmin, umax, vmax = inset_domain(layout, 0.3)
    centre = np.array([0.5 * (umin + umax), 0.5 * (vmin + vmax)])
    travel = speed * (duration - onset)
    frames = []
    for i, (mount, obj) in enumerate(zip(mounts, _OBJECT_VELOCITY[(kind, direction)])):
        vel = mount.inverse(speed * np.asarray(obj))
        start = centre - 0.5 * travel * vel / speed
        sc = SynthScenario(
            layout=layout,
            path=SlipPath(tuple(start), tuple(vel), onset),
            force=force,  # the grip is already established when recording starts
            duration=duration,
            snr_db=snr_db,
        )
        frames.append(synth_frames(sc, seed=2 * seed + i)[0])
    return SlipCase(frames[0], frames[1], mounts, onset, kind, direction)


# --------------------------------------------------------------------------
# force from contour area


def press_area(pipeline, frames):
    """Area of the touch region of a whole press taken as a single aggregation window.

    With ``config.signed`` the window activity is the net event count, so
    noise events of both polarities cancel and, in carry-over mode, each
    taxel's activity is its net log change over the press divided by tau.
    """
    frames = pipeline.prepare(frames)
    stream = pipeline.events(frames, prepared=True)
    t0, t1 = frames[0].timestamp, frames[-1].timestamp
    window = (t1 - t0) + 1.0 / max(len(frames) - 1, 1)
    c = pipeline.config
    frame = aggregate(stream, window, t0=t0, taxel_count=pipeline.layout.taxel_count, span=(t0, t1), signed=c.signed)[0]
    surf = interpolate_grid(frame, pipeline.tri, c.grid_cols, c.grid_rows)
    region = touch_region(surf, c.contour_levels, frame.total_events, c.min_events)
    return 0.0 if region is None else region.area


class ForceSample(NamedTuple):
    area: float
    force: float


@dataclass(frozen=True, eq=False)
class ForceModel:
    method: str
    params: dict

    def predict(self, area):
        a = np.asarray(area, dtype=float)
        p = self.params
        if self.method in ("poly-ls", "huber"):
            return np.polynomial.polynomial.polyval(a, p["coef"])
        if self.method == "mlp":
            x = (a.reshape(-1, 1) - p["x_mean"]) / p["x_scale"]
            y = _mlp_forward(p["weights"], x)[-1][:, 0]
            return (y * p["y_scale"] + p["y_mean"]).reshape(a.shape)
        raise ValueError(f"unknown method {self.method!r}")

    def summary(self):
        lines = [f"method={self.method}"]
        if "coef" in self.params:
            lines.append("coef=" + ",".join(f"{c:.9g}" for c in self.params["coef"]))
        if "iterations" in self.params:
            lines.append(f"iterations={self.params['iterations']}")
        if "epochs" in self.params:
            lines.append(f"epochs={self.params['epochs']}")
        return "\n".join(lines) + "\n"


MLP_WIDTHS = (8, 16, 32, 64, 32, 16, 8)


def _vandermonde(a, degree):
    return np.vander(a, degree + 1, increasing=True)


def _huber_irls(a, y, degree, delta, tol, max_iter):
    X = _vandermonde(a, degree)
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    for it in range(1, max_iter + 1):
        r = np.abs(y - X @ coef)
        w = np.where(r <= delta, 1.0, delta / np.maximum(r, 1e-300))
        sw = np.sqrt(w)
        new = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)[0]
        if np.max(np.abs(new - coef)) < tol:
            return new, it
        coef = new
    raise NonConvergence(f"Huber IRLS did not converge in {max_iter} iterations")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _mlp_forward(weights, x):
    acts = [x]
    h = x
    for k, (W, b) in enumerate(weights):
        z = h @ W + b
        h = z if k == len(weights) - 1 else _sigmoid(z)
        acts.append(h)
    return acts


def _fit_mlp(a, y, seed, epochs, eta0, decay, batch, widths):
    rng = np.random.default_rng(seed)
    x_mean, x_scale = a.mean(), a.std() or 1.0
    y_mean, y_scale = y.mean(), y.std() or 1.0
    X = ((a - x_mean) / x_scale)[:, None]
    Y = ((y - y_mean) / y_scale)[:, None]
    sizes = (1,) + tuple(widths) + (1,)
    weights = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (n_in + n_out))  # Glorot uniform
        weights.append([rng.uniform(-bound, bound, (n_in, n_out)), np.zeros(n_out)])
    n = len(X)
    for epoch in range(epochs):
        eta = eta0 / (1.0 + decay * epoch)
        order = rng.permutation(n)
        for s in range(0, n, batch):
            idx = order[s : s + batch]
            acts = _mlp_forward(weights, X[idx])
            grad = (acts[-1] - Y[idx]) / len(idx)
            for k in range(len(weights) - 1, -1, -1):
                W, b = weights[k]
                gW = acts[k].T @ grad
                gb = grad.sum(axis=0)
                if k:
                    h = acts[k]
                    grad = (grad @ W.T) * h * (1.0 - h)
                weights[k] = [W - eta * gW, b - eta * gb]
    return {
        "weights": [(W, b) for W, b in weights],
        "x_mean": x_mean,
        "x_scale": x_scale,
        "y_mean": y_mean,
        "y_scale": y_scale,
        "epochs": epochs,
    }


def fit_force_model(
    samples,
    method="huber",
    degree=1,
    delta=1.0,
    tol=1e-8,
    max_iter=100,
    seed=0,
    epochs=5000,
    eta0=0.01,
    decay=1e-3,
    batch=1,
    widths=MLP_WIDTHS,
) -> ForceModel:
    """Fit force as a function of contour area.

    ``poly-ls`` is ordinary least squares on a polynomial of ``degree``;
    ``huber`` reweights the same design with Huber weights (residuals in
    Newtons, threshold ``delta``) until the coefficients move less than
    ``tol``; ``mlp`` trains a logistic network with learning rate
    ``eta0 / (1 + decay * epoch)``.  ``batch=1`` is plain per-sample SGD.
    """
    arr = np.array([(s[0], s[1]) for s in samples], dtype=float).reshape(-1, 2)
    a, y = arr[:, 0], arr[:, 1]
    if method == "poly-ls":
        if len(a) < degree + 1:
            raise InsufficientData(f"degree {degree} needs {degree + 1} samples, got {len(a)}")
        coef = np.linalg.lstsq(_vandermonde(a, degree), y, rcond=None)[0]
        return ForceModel("poly-ls", {"coef": coef, "degree": degree})
    if len(a) < 10:
        raise InsufficientData(f"{method} needs at least 10 samples, got {len(a)}")
    if method == "huber":
        coef, it = _huber_irls(a, y, degree, delta, tol, max_iter)
        return ForceModel("huber", {"coef": coef, "degree": degree, "iterations": it})
    if method == "mlp":
        return ForceModel("mlp", _fit_mlp(a, y, seed, epochs, eta0, decay, batch, widths))
    raise ValueError(f"unknown force model {method!r}")


def map_error(y, yhat, epsilon=1e-8):
    """Mean absolute percentage error with denominator ``max(epsilon, |y|)``."""
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} targets but {len(yhat)} predictions")
    if len(y) == 0:
        raise LengthMismatch("map_error needs at least one value")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return float(np.mean(np.abs(y - yhat) / np.maximum(epsilon, np.abs(y))))


def spearman(x, y):
    """Spearman rank correlation (average ranks for ties)."""
    from scipy.stats import spearmanr

    return float(spearmanr(x, y).statistic)


# --------------------------------------------------------------------------
# edge servoing

SHAPES = ("circle", "triangle", "spiral", "zig-zag")


def _circle(radius=30.0, n=360):
    a = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    return np.column_stack([radius * np.cos(a), radius * np.sin(a)])


def edge_shape(kind, size=30.0):
    """Material region bounded by the edge to follow, plus the start point and tangent.

    Returns ``(polygon, start, tangent)``.  The polygon is counter-clockwise
    with the material inside; following ``tangent`` keeps material on the
    left.
    """
    if kind == "circle":
        poly = _circle(size)
        return poly, np.array([size, 0.0]), np.array([0.0, 1.0])
    if kind == "triangle":
        ang = math.pi / 2 + np.arange(3) * 2 * math.pi / 3
        poly = size * np.column_stack([np.cos(ang), np.sin(ang)])
        # start mid-way along the edge from the top vertex to the lower-left one
        start = 0.5 * (poly[0] + poly[1])
        tan = poly[1] - poly[0]
        return poly, start, tan / np.linalg.norm(tan)
    if kind == "spiral":
        # a band between two arms of an Archimedean spiral
        th = np.linspace(0.0, 3 * math.pi, 400)
        outer = (size + 0.25 * size * th / math.pi)[:, None] * np.column_stack([np.cos(th), np.sin(th)])
        inner = (0.4 * size + 0.25 * size * th / math.pi)[:, None] * np.column_stack([np.cos(th), np.sin(th)])
        poly = np.vstack([outer, inner[::-1]])
        tan = np.array([0.25 * size / math.pi, size])
        return poly, outer[0], tan / np.linalg.norm(tan)
    if kind == "zig-zag":
        # teeth along the top of a block; the edge is followed right to left
        teeth = 4
        pitch = size
        xs = np.arange(2 * teeth + 1) * pitch / 2
        ys = np.where(np.arange(2 * teeth + 1) % 2 == 0, 0.0, 0.5 * size)
        top = np.column_stack([xs, ys])[::-1]
        poly = np.vstack([top, [[0.0, -2 * size], [xs[-1], -2 * size]]])
        start = 0.5 * (top[0] + top[1])
        tan = top[1] - top[0]
        return poly[::-1], start, tan / np.linalg.norm(tan)
    raise ValueError(f"unknown shape {kind!r}; expected one of {SHAPES}")


def _sunflower(n=61):
    k = np.arange(n) + 0.5
    r = np.sqrt(k / n)
    a = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


@dataclass
class EdgeWorld:
    """A finger touching a planar shape.

    The sensor is mounted rotated by pi relative to the finger heading, so a
    taxel at sensor coordinates ``p`` sits at ``position - R(heading) @ p``
    in the world.
    """

    polygon: np.ndarray
    position: np.ndarray
    heading: float = 0.0
    footprint_radius: float = 5.0
    k_p: float = 0.5
    v_f: float = 10.0
    tangent: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))
    layout: SensorLayout = field(default_factory=default_layout)
    force: float = 20.0
    tap_frames: int = 5
    rate: float = 100.0
    correction: str = "full"

    def __post_init__(self):
        if not self.footprint_radius > 0:
            raise ValueError("footprint radius must be positive")
        if self.correction not in ("full", "normal"):
            raise ValueError("correction must be 'full' or 'normal'")
        self.polygon = np.asarray(self.polygon, dtype=float)
        if len(self.polygon) < 3:
            raise ValueError("shape polygon needs at least 3 vertices")
        self.position = np.array(self.position, dtype=float)
        t = np.asarray(self.tangent, dtype=float)
        self.tangent = t / np.linalg.norm(t)
        self._prev = None

    @classmethod
    def for_shape(cls, kind, size=30.0, **kw):
        poly, start, tan = edge_shape(kind, size)
        return cls(polygon=poly, position=start, tangent=tan, **kw)

    @property
    def rotation(self):
        c, s = math.cos(self.heading), math.sin(self.heading)
        return np.array([[c, -s], [s, c]])

    def taxel_world(self):
        return self.position - self.layout.positions_2d @ self.rotation.T

    def stimulus(self):
        """Edge-localized stimulus per taxel: ``4 occ (1 - occ)`` of disk occupancy."""
        from matplotlib.path import Path

        pts = self.taxel_world()
        disk = _sunflower() * self.footprint_radius
        samples = (pts[:, None, :] + disk[None, :, :]).reshape(-1, 2)
        inside = Path(self.polygon).contains_points(samples).reshape(len(pts), len(disk))
        occ = inside.mean(axis=1)
        return 4.0 * occ * (1.0 - occ)


class ServoCommand(NamedTuple):
    velocity: np.ndarray
    lost: bool


def servo_step(world: EdgeWorld, centroid, center=(0.0, 0.0)) -> ServoCommand:
    """Feed along the tangent while pulling the contour centroid to ``center``.

    ``v_f * t + K_p * R(heading) @ (center - centroid)``.  With
    ``world.correction == "normal"`` the correction loses its component
    along ``t``: the centroid's position along a straight edge says nothing
    about where the edge is, and on a sparse taxel grid that component is
    mostly quantization.
    """
    if centroid is None:
        return ServoCommand(np.zeros(2), True)
    err = world.rotation @ (np.asarray(center, dtype=float) - np.asarray(centroid, dtype=float))
    if world.correction == "normal":
        err = err - (err @ world.tangent) * world.tangent
    return ServoCommand(world.v_f * world.tangent + world.k_p * err, False)


def _tap_centroid(world, tri, cfg, baselines, gains, t0):
    """Press the finger once and locate the contact with the event pipeline."""
    phi = world.stimulus()
    n = world.tap_frames
    ramp = np.linspace(0.0, 1.0, n + 1)
    t = t0 + np.arange(n + 1) / world.rate
    frames = [TaxelFrame(float(tk), baselines + gains * world.force * phi * r) for tk, r in zip(t, ramp)]
    stream = stream_events(frames, cfg.tau, carry_over=cfg.carry_over)
    frames_ev = aggregate(stream, (n + 1) / world.rate, t0=t0, taxel_count=len(baselines), span=(t0, t[-1]))
    fr = frames_ev[0]
    surf = interpolate_grid(fr, tri, cfg.grid_cols, cfg.grid_rows)
    region = touch_region(surf, cfg.contour_levels, fr.total_events, cfg.min_events)
    return None if region is None else region.centroid


def simulate_edge_tracking(world: EdgeWorld, config: PipelineConfig | None = None, steps=200, dt=0.1, seed=0, max_lost=10):
    """Closed-loop edge following; returns an ``(steps + 1, 4)`` array of ``t, x, y, heading``.

    Each step taps the surface, runs events, aggregation, the Sibson surface
    and contouring on the tap, then integrates the servo command over
    ``dt``.  The tangent estimate is the direction of the last finger
    displacement.  Raises :class:`LostEdge` after more than ``max_lost``
    consecutive steps without a contact region.
    """
    cfg = config or PipelineConfig()
    tri = triangulate(world.layout)
    rng = np.random.default_rng(seed)
    n = world.layout.taxel_count
    baselines = rng.uniform(1500.0, 2500.0, n)
    gains = rng.uniform(0.8, 1.2, n) * 300.0
    out = [(0.0, world.position[0], world.position[1], world.heading)]
    lost = 0
    for k in range(steps):
        c = _tap_centroid(world, tri, cfg, baselines, gains, k * dt)
        cmd = servo_step(world, c)
        if cmd.lost:
            lost += 1
            if lost > max_lost:
                raise LostEdge(f"contact lost for {lost} consecutive steps at step {k}", np.array(out))
        else:
            lost = 0
        new = world.position + dt * cmd.velocity
        step = new - world.position
        if np.linalg.norm(step) > 1e-12 and world.v_f > 0:
            tan = step / np.linalg.norm(step)
            # keep the feed direction: a large along-edge correction must not reverse it
            world.tangent = tan if tan @ world.tangent >= 0 else -tan
        world.position = new
        out.append(((k + 1) * dt, new[0], new[1], world.heading))
    return np.array(out)


def _project_to_boundary(polygon, pts):
    """Arc-length coordinate and distance of each point's nearest boundary point."""
    a = np.asarray(polygon, dtype=float)
    b = np.roll(a, -1, axis=0)
    seg = b - a
    seg_len = np.linalg.norm(seg, axis=1)
    start = np.concatenate([[0.0], np.cumsum(seg_len)[:-1]])
    p = np.asarray(pts, dtype=float)[:, None, :]
    s = np.clip(((p - a) * seg).sum(axis=-1) / seg_len**2, 0.0, 1.0)
    foot = a + s[..., None] * seg
    d = np.linalg.norm(p - foot, axis=-1)
    k = np.argmin(d, axis=1)
    idx = np.arange(len(k))
    return start[k] + s[idx, k] * seg_len[k], d[idx, k], seg_len.sum()


def edge_progress(polygon, positions):
    """Signed distance travelled along the shape boundary, and the largest distance off it.

    Positions are projected onto the closed boundary; successive arc-length
    differences are unwrapped modulo the perimeter and summed.
    """
    s, d, perimeter = _project_to_boundary(polygon, positions)
    ds = np.diff(s)
    ds = (ds + 0.5 * perimeter) % perimeter - 0.5 * perimeter
    return float(ds.sum()), float(d.max())
