import numpy as np
import pytest

from conftest import random_layout
from gradtac.errors import UnknownKind
from gradtac.geometry import SensorLayout
from gradtac.synth import (
    PATH_KINDS,
    SlipPath,
    StationaryPath,
    SynthScenario,
    inset_domain,
    make_path,
    press_scenario,
    synth_frames,
    tracking_scenario,
    trapezoid,
)

DOMAIN = (-10.0, -6.0, 10.0, 6.0)


def test_left_to_right():
    p = make_path("left-to-right", DOMAIN, 2.0)
    assert np.allclose(p(0.0), (-10.0, 0.0)) and np.allclose(p(2.0), (10.0, 0.0))
    assert np.allclose(p(np.linspace(0, 2, 9))[:, 1], 0.0)


@pytest.mark.parametrize("kind", ["clockwise", "counter-clockwise"])
def test_circles_close(kind):
    p = make_path(kind, DOMAIN, 3.0)
    assert np.allclose(p(0.0), p(3.0), atol=1e-12)
    c = p(np.linspace(0, 3, 50))
    assert np.allclose(np.hypot(c[:, 0], c[:, 1]), 6.0)


def test_circle_orientation():
    t = np.linspace(0, 1, 20)
    for kind, sign in (("clockwise", -1), ("counter-clockwise", 1)):
        c = make_path(kind, DOMAIN, 1.0)(t)
        ang = np.unwrap(np.arctan2(c[:, 1], c[:, 0]))
        assert np.all(sign * np.diff(ang) > 0)


def test_diagonal_bottom_to_top_increasing():
    c = make_path("diagonal bottom-to-top", DOMAIN, 1.0)(np.linspace(0, 1, 30))
    assert np.all(np.diff(c[:, 0]) > 0) and np.all(np.diff(c[:, 1]) > 0)


def test_all_kinds_span_domain():
    for kind in PATH_KINDS:
        c = make_path(kind, DOMAIN, 1.0)(np.linspace(0, 1, 200))
        assert c[:, 0].min() >= -10 - 1e-9 and c[:, 0].max() <= 10 + 1e-9
        assert c[:, 1].min() >= -6 - 1e-9 and c[:, 1].max() <= 6 + 1e-9


def test_unknown_kind():
    with pytest.raises(UnknownKind):
        make_path("zig", DOMAIN, 1.0)


def test_inset_domain(layout):
    umin, vmin, umax, vmax = layout.bounds
    a = inset_domain(layout, 0.25)
    assert a[0] == pytest.approx(umin + 0.25 * (umax - umin))
    assert a[3] == pytest.approx(vmax - 0.25 * (vmax - vmin))


def test_trapezoid():
    f = trapezoid(4.0, 1.0, ramp=0.2)
    assert f(0.0) == 0.0 and f(0.1) == pytest.approx(2.0) and f(0.5) == 4.0 and f(1.0) == 0.0 and f(1.5) == 0.0


def _scenario(layout, force=3.0, snr=20.0, path=None, **kw):
    return SynthScenario(layout, path or StationaryPath((0.0, 0.0)), force, 0.5, snr_db=snr, **kw)


def test_zero_force_means_near_baseline(layout):
    B = np.linspace(1500, 2500, 24)
    frames, truth = synth_frames(_scenario(layout, force=0.0, baselines=B), seed=1)
    x = np.array([f.values for f in frames])
    sd = np.std(x - B, axis=0).max()
    assert sd > 0
    assert np.all(np.abs(x.mean(axis=0) - B) <= 3 * sd)
    assert not truth.contact.any()


def test_peak_taxel_has_max_deviation():
    pts = np.array([[0.0, 0.0], [20.0, 0.0], [0.0, 20.0], [20.0, 20.0], [-20.0, 5.0]])
    lay = SensorLayout.from_2d(pts)
    sc = SynthScenario(lay, StationaryPath((0.0, 0.0)), 3.0, 0.3, radius=1.0, snr_db=20.0, baselines=np.full(5, 2000.0))
    frames, _ = synth_frames(sc, seed=0)
    dev = np.array([f.values for f in frames]).mean(axis=0) - 2000.0
    assert np.argmax(dev) == 0


def test_linearity_in_force(layout):
    a, _ = synth_frames(_scenario(layout, force=2.0, snr=None), seed=3)
    b, _ = synth_frames(_scenario(layout, force=4.0, snr=None), seed=3)
    B = synth_frames(_scenario(layout, force=0.0, snr=None), seed=3)[0][0].values
    da = np.array([f.values for f in a]) - B
    db = np.array([f.values for f in b]) - B
    assert np.allclose(db, 2 * da, rtol=1e-12, atol=1e-9)


def test_determinism(layout):
    sc = tracking_scenario("clockwise", layout, duration=0.5)
    a, ta = synth_frames(sc, seed=11)
    b, tb = synth_frames(sc, seed=11)
    assert a == b and np.array_equal(ta.contact_points, tb.contact_points)
    c, _ = synth_frames(sc, seed=12)
    assert a != c


def test_localization_consistency_noise_free():
    lay = random_layout(2)
    sc = tracking_scenario("diagonal-top-to-bottom", lay, duration=1.0, snr_db=None)
    sc = SynthScenario(lay, sc.path, sc.force, sc.duration, snr_db=None, baselines=np.full(24, 2000.0), gains=np.full(24, 300.0))
    frames, truth = synth_frames(sc, seed=0)
    for f, c, F in zip(frames, truth.contact_points, truth.force):
        if F > 0:
            near = np.argmin(((lay.positions_2d - c) ** 2).sum(axis=1))
            assert np.argmax(f.values - 2000.0) == near


def test_snr_definition(layout):
    sc = _scenario(layout, snr=20.0, baselines=np.full(24, 2000.0))
    noisy, _ = synth_frames(sc, seed=5)
    clean, _ = synth_frames(_scenario(layout, snr=None, baselines=np.full(24, 2000.0)), seed=5)
    x = np.array([f.values for f in noisy])
    y = np.array([f.values for f in clean])
    noise = x - y
    signal = y - 2000.0
    ratio = 10 * np.log10(np.mean(signal**2) / np.mean(noise**2))
    assert ratio == pytest.approx(20.0, abs=0.5)


def test_ground_truth_alignment(layout):
    frames, truth = synth_frames(tracking_scenario("left-to-right", layout, duration=0.5), seed=0)
    assert len(frames) == len(truth.timestamps) == 51
    assert np.array_equal([f.timestamp for f in frames], truth.timestamps)
    pts, force = truth.at([0.25])
    assert force[0] == pytest.approx(3.0)


def test_hysteresis_lags(layout):
    lay = layout
    base = dict(layout=lay, path=StationaryPath((0.0, 0.0)), force=trapezoid(3.0, 1.0, ramp=0.05), duration=1.0, snr_db=None)
    fast, _ = synth_frames(SynthScenario(**base), seed=0)
    slow, _ = synth_frames(SynthScenario(**base, hysteresis=(0.05, 0.2)), seed=0)
    k = 10  # shortly after the ramp
    j = np.argmax(fast[50].values - fast[0].values)
    assert slow[k].values[j] < fast[k].values[j]
    assert slow[-1].values[j] > fast[-1].values[j]


def test_slip_path_and_press():
    p = SlipPath((1.0, 2.0), (3.0, 0.0), 1.0)
    assert np.allclose(p([0.5, 1.0, 2.0]), [[1, 2], [1, 2], [4, 2]])
    sc = press_scenario(SensorLayout.from_2d([[0, 0], [1, 0], [0, 1]]), (0.2, 0.2), 5.0)
    assert sc.duration == pytest.approx(0.3)
    assert sc.force(np.array([0.1, 0.25]))[1] == pytest.approx(5.0)


@pytest.mark.parametrize("kw", [dict(duration=0), dict(rate=0), dict(radius=0), dict(baselines=np.zeros(3))])
def test_scenario_invariants(kw):
    lay = SensorLayout.from_2d([[0, 0], [1, 0], [0, 1]])
    base = dict(layout=lay, path=StationaryPath((0, 0)), force=1.0, duration=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        SynthScenario(**base)
