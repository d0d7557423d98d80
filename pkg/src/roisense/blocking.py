"""View-blocking scores: how much ROI depth each visible object hides from the camera."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRay, UnknownObject
from .scene import Scene
from .sensing import Observation, RoiBox, Viewpoint


@dataclass(frozen=True)
class BlockEntry:
    object_id: int
    score: float
    viewpoint: Viewpoint


def _box(roi, spec):
    if isinstance(roi, RoiBox):
        if spec is None:
            raise ValueError("a GridSpec is needed to place a voxel ROI in the world")
        return roi.world_box(spec)
    lo, hi = roi
    return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)


def _slab(cam, pts, lo, hi):
    """Entry/exit parameters of rays ``cam + t * (pts - cam)`` against a box.

    Returns ``(t0, t1, hit)`` with ``t`` in units of the camera-to-point
    distance; ``hit`` is false where the line misses the box or the box lies
    wholly behind the camera.
    """
    d = pts - cam
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo - cam) / d
        tb = (hi - cam) / d
    near = np.minimum(ta, tb)
    far = np.maximum(ta, tb)
    par = d == 0
    inside = (cam >= lo) & (cam <= hi)
    near = np.where(par, np.where(inside, -np.inf, np.inf), near)
    far = np.where(par, np.where(inside, np.inf, -np.inf), far)
    t0 = near.max(axis=-1)
    t1 = far.min(axis=-1)
    hit = (t0 <= t1) & (t1 >= 0)
    return np.maximum(t0, 0.0), t1, hit


def ray_roi_segment(camera, p, roi, spec=None):
    """``(p1, p2)`` where the ray from ``camera`` through ``p`` enters and leaves the ROI box.

    ``p2`` is the intersection farther from the camera.  Returns ``None`` when
    the ray misses the box or the box is entirely behind the camera.
    """
    cam = np.asarray(camera, dtype=float)
    p = np.asarray(p, dtype=float)
    dist = np.linalg.norm(p - cam)
    if dist < 1e-9:
        raise DegenerateRay("point coincides with the camera")
    lo, hi = _box(roi, spec)
    t0, t1, hit = _slab(cam, p[None], lo, hi)
    if not hit[0]:
        return None
    d = p - cam
    return cam + t0[0] * d, cam + t1[0] * d


def segment_scores(camera, points, roi, spec=None) -> np.ndarray:
    """Per-point blocking contribution ``|p - p2|`` gated by the behind-the-point test."""
    cam = np.asarray(camera, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        return np.zeros(0)
    lo, hi = _box(roi, spec)
    t0, t1, hit = _slab(cam, pts, lo, hi)
    p2 = cam + np.where(hit, t1, 0.0)[:, None] * (pts - cam)
    gate = np.einsum("ij,ij->i", p2 - pts, cam - pts) < 0
    seg = np.linalg.norm(pts - p2, axis=1)
    return np.where(hit & gate, seg, 0.0)


def blocking_score(scene: Scene, roi: RoiBox, obs: Observation, oid: int) -> float:
    """Sum of segment lengths over the voxels of ``oid`` visible in ``obs``."""
    if oid not in scene.objects:
        raise UnknownObject(oid)
    vox = obs.visible_voxels(oid)
    if len(vox) == 0:
        return 0.0
    pts = scene.spec.voxel_centers(vox)
    return float(segment_scores(obs.viewpoint.pos, pts, roi, scene.spec).sum())


def rank_blockers(scene: Scene, roi: RoiBox, obs: Observation, h_min: float | None = None,
                  exclude=()) -> list[BlockEntry]:
    """Visible present objects scoring above ``h_min``, highest first, ties by id."""
    h_min = scene.spec.resolution if h_min is None else h_min
    entries = []
    for oid in obs.visible_ids():
        if oid in exclude or not scene.objects[oid].present:
            continue
        h = blocking_score(scene, roi, obs, oid)
        if h > h_min:
            entries.append(BlockEntry(oid, h, obs.viewpoint))
    entries.sort(key=lambda e: (-e.score, e.object_id))
    return entries
