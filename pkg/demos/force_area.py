"""
Force from contact area
=======================

Presses of different force at one spot on one sensor.  Each press is
aggregated into a single window; the area of its touch region grows with
force.  A straight-line Huber fit maps area back to force and shrugs off
a few corrupted labels that pull the least-squares line away.

    python demos/force_area.py
"""
import dataclasses

import numpy as np

from gradtac.geometry import PipelineConfig, default_layout
from gradtac.pipeline import Pipeline
from gradtac.synth import press_scenario, synth_frames
from gradtac.tasks import ForceSample, fit_force_model, map_error, press_area, spearman

layout = default_layout()
pipe = Pipeline(layout, PipelineConfig(contour_levels=2, carry_over=True, tau=0.005))

# one physical sensor: fixed per-taxel baselines and gains
rs = np.random.default_rng(0)
base = rs.uniform(1500, 2500, layout.taxel_count)
gain = rs.uniform(0.8, 1.2, layout.taxel_count) * 300

rng = np.random.default_rng(1)
force = rng.uniform(2.0, 10.0, 80)
area = np.array(
    [
        press_area(pipe, synth_frames(dataclasses.replace(press_scenario(layout, (0.0, 0.0), f, snr_db=40.0), baselines=base, gains=gain), seed=i)[0])
        for i, f in enumerate(force)
    ]
)
print(f"Spearman(area, force) = {spearman(area, force):.3f}")
for f in (2, 4, 6, 8, 10):
    near = np.abs(force - f) < 0.5
    if near.any():
        print(f"  ~{f:2d} N -> mean area {area[near].mean():6.2f} mm^2")

train, test = slice(0, 60), slice(60, 80)
labels = force.copy()
labels[rng.choice(60, 6, replace=False)] += 15.0  # corrupted training labels
samples = [ForceSample(a, f) for a, f in zip(area[train], labels[train])]
for method in ("huber", "poly-ls"):
    model = fit_force_model(samples, method)
    print(f"{method:>8}: held-out MAP {map_error(force[test], model.predict(area[test])):.3f}")
