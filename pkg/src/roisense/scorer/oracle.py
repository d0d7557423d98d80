"""Exact coverage prediction by simulating the observation on the ground truth."""
import numpy as np

from ..scene import Scene
from ..sensing import CameraConfig, RoiBox, Viewpoint, coverage, trace


def oracle_score(scene: Scene, roi: RoiBox, v: Viewpoint, camera: CameraConfig | None = None) -> float:
    """ROI coverage the belief would reach after observing from ``v``; the scene is not modified."""
    camera = camera or CameraConfig()
    observed = np.count_nonzero(scene.belief[roi.slices])
    *_, new_roi = trace(scene, v, camera, roi)
    return (observed + new_roi) / roi.size


def oracle_scores(scene: Scene, roi: RoiBox, views, camera: CameraConfig | None = None) -> np.ndarray:
    camera = camera or CameraConfig()
    observed = np.count_nonzero(scene.belief[roi.slices])
    out = np.empty(len(views))
    for i, v in enumerate(views):
        *_, new_roi = trace(scene, v, camera, roi)
        out[i] = (observed + new_roi) / roi.size
    return out


def clone_observe_coverage(scene: Scene, roi: RoiBox, v: Viewpoint, camera: CameraConfig | None = None) -> float:
    """Reference path: observe on a deep copy and measure coverage there."""
    from ..sensing import observe

    twin = scene.copy()
    observe(twin, v, camera)
    return coverage(twin.belief, roi)
