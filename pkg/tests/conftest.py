import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gradtac.geometry import SensorLayout, TaxelFrame, default_layout  # noqa: E402


def random_layout(seed, n=24, width=30.0, height=20.0):
    """Random sites with a minimum spacing, so no near-degenerate cells."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        p = rng.uniform([-width / 2, -height / 2], [width / 2, height / 2])
        if all(np.hypot(*(p - q)) > 1.0 for q in pts):
            pts.append(p)
    return SensorLayout.from_2d(np.array(pts), name=f"random-{seed}")


def frames_of(values, rate=100.0, t0=0.0):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return [TaxelFrame(t0 + i / rate, row) for i, row in enumerate(values)]


@pytest.fixture(scope="session")
def layout():
    return default_layout()


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    lines = getattr(acc, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
