import numpy as np
import pytest

from roisense.scene import GridSpec, Scene, SceneObject
from roisense.sensing import CameraConfig


def box(oid, center, size, color="red", shape_label="box", yaw=0.0, category="small"):
    return SceneObject(oid, "box", tuple(center), yaw, tuple(size), color, shape_label, category)


def aligned_box(spec, oid, lo_idx, hi_idx, color="red"):
    """Axis-aligned box covering the inclusive voxel range ``lo_idx..hi_idx``."""
    lo = spec.lo + np.asarray(lo_idx) * spec.resolution
    hi = spec.lo + (np.asarray(hi_idx) + 1) * spec.resolution
    return box(oid, (lo + hi) / 2, hi - lo, color=color)


@pytest.fixture
def small_camera():
    return CameraConfig(width=40, height=30)


@pytest.fixture
def empty_scene():
    spec = GridSpec((20, 15, 10), 0.02, (-0.2, 0.3, 0.4))
    return Scene(spec)


@pytest.fixture
def wall_scene():
    """Shelf with a one-voxel-thick wall spanning the full cross-section at y index 7."""
    spec = GridSpec((20, 15, 10), 0.02, (-0.2, 0.3, 0.4))
    return Scene(spec, [aligned_box(spec, 0, (0, 7, 0), (19, 7, 9), color="gray")])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
