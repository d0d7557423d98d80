"""Compiled incremental grid traversal used by observation and oracle scoring.

Every ray is clipped to the grid box, then walked voxel by voxel (Amanatides
and Woo).  The walk stops at the first ground-truth occupied voxel, when the
next voxel begins beyond ``max_range``, or when it leaves the grid.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def clip_to_box(o, d, lo, hi, t_max):
    t0 = 0.0
    t1 = t_max
    for a in range(3):
        if d[a] == 0.0:
            if o[a] < lo[a] or o[a] > hi[a]:
                return 1.0, 0.0
        else:
            ta = (lo[a] - o[a]) / d[a]
            tb = (hi[a] - o[a]) / d[a]
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
    return t0, t1


@njit(cache=True)
def trace_rays(cam, dirs, truth, lo, res, max_range, stamp, belief, roi):
    """Walk every ray in ``dirs`` from ``cam``.

    Traversed free voxels and terminating hits get ``stamp = 1``.  Returns
    per-ray hit object id (-1 for none), hit distance (inf for none), hit
    voxel index, and the number of distinct ROI voxels that were UNKNOWN in
    ``belief`` and got stamped (``roi`` = inclusive x0,x1,y0,y1,z0,z1).
    """
    n = dirs.shape[0]
    nx, ny, nz = truth.shape
    hi = np.empty(3)
    hi[0] = lo[0] + nx * res
    hi[1] = lo[1] + ny * res
    hi[2] = lo[2] + nz * res
    hit_id = np.full(n, -1, dtype=np.int32)
    hit_t = np.full(n, np.inf)
    hit_vox = np.full((n, 3), -1, dtype=np.int32)
    dims = np.array([nx, ny, nz])
    idx = np.empty(3, dtype=np.int64)
    step = np.empty(3, dtype=np.int64)
    new_roi = 0
    for r in range(n):
        d = dirs[r]
        t0, t1 = clip_to_box(cam, d, lo, hi, max_range)
        if t0 > t1:
            continue
        for a in range(3):
            p = cam[a] + t0 * d[a]
            i = int(math.floor((p - lo[a]) / res))
            if i < 0:
                i = 0
            elif i >= dims[a]:
                i = dims[a] - 1
            idx[a] = i
            if d[a] > 0.0:
                step[a] = 1
            elif d[a] < 0.0:
                step[a] = -1
            else:
                step[a] = 0
        t_enter = t0
        while True:
            if t_enter > max_range:
                break
            i, j, k = idx[0], idx[1], idx[2]
            occ = truth[i, j, k]
            if stamp[i, j, k] == 0:
                stamp[i, j, k] = 1
                if (belief[i, j, k] == 0 and roi[0] <= i <= roi[1]
                        and roi[2] <= j <= roi[3] and roi[4] <= k <= roi[5]):
                    new_roi += 1
            if occ >= 0:
                hit_id[r] = occ
                hit_t[r] = t_enter
                hit_vox[r, 0] = i
                hit_vox[r, 1] = j
                hit_vox[r, 2] = k
                break
            # next boundary crossing on each axis, measured from the camera
            best = -1
            t_best = np.inf
            for a in range(3):
                if step[a] != 0:
                    edge = idx[a] + 1 if step[a] > 0 else idx[a]
                    ta = (lo[a] + edge * res - cam[a]) / d[a]
                    if ta < t_best:
                        t_best = ta
                        best = a
            if best < 0:
                break
            idx[best] += step[best]
            if idx[best] < 0 or idx[best] >= dims[best]:
                break
            t_enter = t_best
    return hit_id, hit_t, hit_vox, new_roi
