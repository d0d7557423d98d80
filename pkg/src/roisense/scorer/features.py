"""Fixed-length feature vector for the learned coverage surrogate.

Layout (length 4103):
  [0, 2048)     belief channel, mean-pooled to 16x16x8 (x, y, z), C order,
                with UNKNOWN = -1, OBSERVED_FREE = 0, OBSERVED_OCCUPIED = +1
  [2048, 4096)  ROI channel, mean-pooled ROI mask, same layout
  [4096, 4103)  viewpoint: position scaled by grid extent (clipped to [-1, 1]),
                sin/cos yaw, sin/cos pitch
"""
import numpy as np

from ..errors import GridTooSmall
from ..scene import GridSpec
from ..sensing import RoiBox, Viewpoint

POOL = (16, 16, 8)
GRID_LEN = POOL[0] * POOL[1] * POOL[2]
VIEW_LEN = 7
FEATURE_LEN = 2 * GRID_LEN + VIEW_LEN

_BELIEF_CODE = np.array([-1.0, 0.0, 1.0])


def _edges(n, p):
    return (np.arange(p + 1) * n) // p


def pool_mean(grid: np.ndarray, pool=POOL) -> np.ndarray:
    """Mean over the blocks of an even integer partition of each axis."""
    if any(n < p for n, p in zip(grid.shape, pool)):
        raise GridTooSmall(f"grid {grid.shape} smaller than pooled shape {pool}")
    out = grid.astype(float)
    for axis, (n, p) in enumerate(zip(grid.shape, pool)):
        e = _edges(n, p)
        out = np.add.reduceat(out, e[:-1], axis=axis)
        shape = [1, 1, 1]
        shape[axis] = p
        out = out / np.diff(e).reshape(shape)
    return out


def grid_features(belief: np.ndarray, roi: RoiBox) -> np.ndarray:
    b = pool_mean(_BELIEF_CODE[belief])
    r = pool_mean(roi.mask(belief.shape))
    return np.concatenate([b.ravel(), r.ravel()])


def viewpoint_features(views, spec: GridSpec) -> np.ndarray:
    """``(n, 7)`` viewpoint block for a list of viewpoints or an ``(n, 5)`` array."""
    a = np.atleast_2d(np.array([v.as_array() for v in views]) if not isinstance(views, np.ndarray) else views)
    pos = np.clip((a[:, :3] - spec.lo) / spec.extent, -1.0, 1.0)
    yaw, pitch = a[:, 3], a[:, 4]
    return np.column_stack([pos, np.sin(yaw), np.cos(yaw), np.sin(pitch), np.cos(pitch)])


def extract_features(belief: np.ndarray, roi: RoiBox, v: Viewpoint, spec: GridSpec) -> np.ndarray:
    return np.concatenate([grid_features(belief, roi), viewpoint_features([v], spec)[0]])


def batch_features(belief, roi, views, spec) -> np.ndarray:
    g = grid_features(belief, roi)
    vf = viewpoint_features(views, spec)
    return np.hstack([np.broadcast_to(g, (len(vf), g.size)), vf])
