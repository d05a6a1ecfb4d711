"""Synthetic taxel streams with ground truth.

Forward model: each taxel reads its baseline plus a Gaussian bump centred
on the contact point, scaled by the applied force and the taxel's gain,
plus white noise::

    X_j(t) = B_j + G_j * F(t) * exp(-|p_j - c(t)|^2 / (2 sigma^2)) + noise

with ``sigma = indenter_radius + 2 mm``.  It is deliberately simple: it is
an oracle for relative behaviour (where the largest change happens), not an
emulation of any particular sensor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import UnknownKind
from .geometry import SensorLayout, TaxelFrame

__all__ = [
    "PATH_KINDS",
    "ContactPath",
    "make_path",
    "inset_domain",
    "trapezoid",
    "SynthScenario",
    "GroundTruth",
    "synth_frames",
    "tracking_scenario",
    "StationaryPath",
    "SlipPath",
    "press_scenario",
]

PATH_KINDS = (
    "top-to-bottom",
    "bottom-to-top",
    "left-to-right",
    "right-to-left",
    "diagonal-top-to-bottom",
    "diagonal-bottom-to-top",
    "clockwise",
    "counter-clockwise",
)

INDENTER_RADII = (0.5, 1.0, 2.5)
GAIN_PER_NEWTON = 300.0


def _canonical_kind(kind: str) -> str:
    k = kind.strip().lower().replace("_", "-").replace(" ", "-")
    if k in ("counterclockwise", "anticlockwise", "anti-clockwise"):
        k = "counter-clockwise"
    if k not in PATH_KINDS:
        raise UnknownKind(f"unknown trajectory kind {kind!r}; expected one of {PATH_KINDS}")
    return k


@dataclass(frozen=True)
class ContactPath:
    """Parametric contact path ``c(t)`` for ``0 <= t <= duration`` (clamped outside)."""

    kind: str
    start: tuple = (0.0, 0.0)
    end: tuple = (0.0, 0.0)
    center: tuple = (0.0, 0.0)
    radius: float = 0.0
    duration: float = 1.0

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.duration)
        s = t / self.duration
        if self.kind in ("clockwise", "counter-clockwise"):
            sign = -1.0 if self.kind == "clockwise" else 1.0
            # start at the top of the circle
            ang = 0.5 * math.pi + sign * 2.0 * math.pi * s
            return np.stack(
                [self.center[0] + self.radius * np.cos(ang), self.center[1] + self.radius * np.sin(ang)],
                axis=-1,
            )
        a = np.asarray(self.start)
        b = np.asarray(self.end)
        return a + np.multiply.outer(s, b - a)


def make_path(kind: str, domain, duration: float) -> ContactPath:
    """One of the eight dataset trajectories spanning ``domain = (umin, vmin, umax, vmax)``.

    Linear kinds run edge to edge along the midline (or corner to corner for
    the diagonals); circular kinds follow the inscribed circle starting and
    ending at its top point.  "Top" is the high-v side.
    """
    k = _canonical_kind(kind)
    if not duration > 0:
        raise ValueError("duration must be positive")
    umin, vmin, umax, vmax = map(float, domain)
    um = 0.5 * (umin + umax)
    vm = 0.5 * (vmin + vmax)
    ends = {
        "top-to-bottom": ((um, vmax), (um, vmin)),
        "bottom-to-top": ((um, vmin), (um, vmax)),
        "left-to-right": ((umin, vm), (umax, vm)),
        "right-to-left": ((umax, vm), (umin, vm)),
        "diagonal-top-to-bottom": ((umin, vmax), (umax, vmin)),
        "diagonal-bottom-to-top": ((umin, vmin), (umax, vmax)),
    }
    if k in ends:
        a, b = ends[k]
        return ContactPath(k, start=a, end=b, duration=duration)
    r = 0.5 * min(umax - umin, vmax - vmin)
    return ContactPath(k, center=(um, vm), radius=r, duration=duration)


def inset_domain(layout: SensorLayout, fraction=0.15):
    """Layout bounding box shrunk by ``fraction`` of its extent on each side."""
    umin, vmin, umax, vmax = layout.bounds
    du = fraction * (umax - umin)
    dv = fraction * (vmax - vmin)
    return umin + du, vmin + dv, umax - du, vmax - dv


def trapezoid(peak, duration, ramp=0.2, start=0.0):
    """Force profile rising linearly over ``ramp`` seconds, holding, then releasing."""

    def force(t):
        t = np.asarray(t, dtype=float) - start
        up = np.clip(t / ramp, 0.0, 1.0)
        down = np.clip((duration - t) / ramp, 0.0, 1.0)
        return peak * np.minimum(up, down) * ((t >= 0) & (t <= duration))

    return force


@dataclass(frozen=True)
class SynthScenario:
    layout: SensorLayout
    path: Callable
    force: Callable
    duration: float
    radius: float = 1.0
    rate: float = 100.0
    snr_db: Optional[float] = 20.0
    baselines: Optional[np.ndarray] = field(default=None, repr=False)
    gains: Optional[np.ndarray] = field(default=None, repr=False)
    hysteresis: Optional[tuple] = None  # (rise, decay) time constants in seconds

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if not self.radius > 0:
            raise ValueError("indenter radius must be positive")
        if self.baselines is not None and np.any(np.asarray(self.baselines) <= 0):
            raise ValueError("baselines must be positive")

    @property
    def sigma(self) -> float:
        return self.radius + 2.0


@dataclass(frozen=True, eq=False)
class GroundTruth:
    timestamps: np.ndarray
    contact_points: np.ndarray
    force: np.ndarray
    contact: np.ndarray

    def at(self, t):
        """Contact point and force linearly interpolated at times ``t``."""
        t = np.asarray(t, dtype=float)
        u = np.interp(t, self.timestamps, self.contact_points[:, 0])
        v = np.interp(t, self.timestamps, self.contact_points[:, 1])
        f = np.interp(t, self.timestamps, self.force)
        return np.stack([u, v], axis=-1), f


def _evaluate(fn_or_value, t):
    if callable(fn_or_value):
        return np.broadcast_to(np.asarray(fn_or_value(t), dtype=float), t.shape + ())
    return np.full(t.shape, float(fn_or_value))


def _lag(dev, dt, rise, decay):
    out = np.empty_like(dev)
    y = np.zeros(dev.shape[1])
    a_rise = 1.0 - math.exp(-dt / rise)
    a_decay = 1.0 - math.exp(-dt / decay)
    for k in range(len(dev)):
        a = np.where(dev[k] > y, a_rise, a_decay)
        y = y + a * (dev[k] - y)
        out[k] = y
    return out


def _signal_power(dev, force):
    # mean squared deviation over all taxels while in contact; a 1 N
    # full-gain reading stands in when there is no contact at all
    live = dev[force > 0]
    if live.size == 0 or not np.any(live):
        return GAIN_PER_NEWTON**2
    return float(np.mean(live**2))


def synth_frames(scenario: SynthScenario, seed: int = 0):
    """Generate ``(frames, ground_truth)``; bit-for-bit deterministic for a seed."""
    rng = np.random.default_rng(seed)
    lay = scenario.layout
    n = lay.taxel_count
    baselines = rng.uniform(1500.0, 2500.0, n)
    gains = rng.uniform(0.8, 1.2, n) * GAIN_PER_NEWTON
    if scenario.baselines is not None:
        baselines = np.asarray(scenario.baselines, dtype=float)
    if scenario.gains is not None:
        gains = np.asarray(scenario.gains, dtype=float)

    n_samples = int(math.floor(scenario.duration * scenario.rate + 1e-9)) + 1
    t = np.arange(n_samples) / scenario.rate
    c = np.asarray(scenario.path(t), dtype=float).reshape(n_samples, 2)
    f = _evaluate(scenario.force, t)
    d2 = ((lay.positions_2d[None, :, :] - c[:, None, :]) ** 2).sum(axis=-1)
    dev = gains[None, :] * f[:, None] * np.exp(-d2 / (2.0 * scenario.sigma**2))
    if scenario.hysteresis is not None:
        rise, decay = scenario.hysteresis
        dev = _lag(dev, 1.0 / scenario.rate, rise, decay)
    x = baselines[None, :] + dev
    if scenario.snr_db is not None:
        noise_sd = math.sqrt(_signal_power(dev, f) / 10.0 ** (scenario.snr_db / 10.0))
        x = x + rng.normal(0.0, noise_sd, x.shape)
    # keep readings physical: counts stay positive
    x = np.maximum(x, 1.0)
    frames = [TaxelFrame(float(tk), row) for tk, row in zip(t, x)]
    truth = GroundTruth(t, c, f, f > 0)
    return frames, truth


def tracking_scenario(kind, layout, duration=3.0, force=3.0, radius=1.0, snr_db=20.0, margin=0.15, ramp=0.2):
    """A sweep of one of the eight trajectory kinds with a trapezoidal force."""
    path = make_path(kind, inset_domain(layout, margin), duration)
    return SynthScenario(
        layout=layout,
        path=path,
        force=trapezoid(force, duration, ramp),
        duration=duration,
        radius=radius,
        snr_db=snr_db,
    )


@dataclass(frozen=True)
class StationaryPath:
    point: tuple

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.point, dtype=float), t.shape + (2,)).copy()


@dataclass(frozen=True)
class SlipPath:
    """Contact held at ``start`` until ``onset``, then sliding at constant ``velocity`` (mm/s)."""

    start: tuple
    velocity: tuple
    onset: float

    def __call__(self, t):
        dt = np.clip(np.asarray(t, dtype=float) - self.onset, 0.0, None)
        return np.asarray(self.start, dtype=float) + np.multiply.outer(dt, np.asarray(self.velocity, dtype=float))


def press_scenario(layout, point, force, ramp=0.2, hold=0.1, radius=1.0, snr_db=20.0):
    """A stationary press loading linearly to ``force`` over ``ramp`` seconds, then held."""
    return SynthScenario(
        layout=layout,
        path=StationaryPath(tuple(point)),
        force=lambda t: force * np.clip(np.asarray(t, dtype=float) / ramp, 0.0, 1.0),
        duration=ramp + hold,
        radius=radius,
        snr_db=snr_db,
    )
