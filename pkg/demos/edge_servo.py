"""
Following an edge
=================

A finger taps along the rim of a disk.  Each tap runs the whole event
pipeline; the servo feeds along the current tangent and pulls the contact
centroid back to the middle of the sensor.  The finger path is written as
a CSV and plotted.

    python demos/edge_servo.py [OUTDIR]
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from gradtac import io  # noqa: E402
from gradtac.errors import LostEdge  # noqa: E402
from gradtac.geometry import PipelineConfig  # noqa: E402
from gradtac.tasks import EdgeWorld, edge_progress, simulate_edge_tracking  # noqa: E402

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)
config = PipelineConfig(contour_levels=2)

fig, axes = plt.subplots(1, 3, figsize=(12, 4))
for ax, (shape, steps) in zip(axes, (("circle", 200), ("triangle", 200), ("zig-zag", 200))):
    world = EdgeWorld.for_shape(shape)
    try:
        path = simulate_edge_tracking(world, config, steps=steps, seed=0)
        status = "ok"
    except LostEdge as err:
        path, status = err.positions, "lost"
    travelled, off = edge_progress(world.polygon, path[:, 1:3])
    print(f"{shape:>8}: {status}, {abs(travelled):6.1f} mm along the edge, at most {off:.2f} mm off it")
    (out / f"servo_{shape}.csv").write_text(io.write_world_csv(path))
    poly = np.vstack([world.polygon, world.polygon[:1]])
    ax.fill(poly[:, 0], poly[:, 1], color="0.85")
    ax.plot(path[:, 1], path[:, 2], lw=1.2)
    ax.set_title(shape)
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig(out / "servo.png", dpi=100)
print(f"wrote paths and servo.png to {out}/")
