"""Pinhole depth camera over the voxel grid: ray casting, belief update and ROI coverage."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _raycast
from .errors import EmptyRoi, InvalidViewpoint, OriginInsideOccupied
from .scene import FREE, Belief, GridSpec, Scene, rle_decode, rle_encode


@dataclass(frozen=True)
class Viewpoint:
    """Camera pose with roll fixed to zero.

    ``yaw`` rotates about +Z with 0 looking along +Y and positive turning
    toward +X; ``pitch`` is the elevation of the optical axis.
    """

    position: tuple[float, float, float]
    yaw: float = 0.0
    pitch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))
        object.__setattr__(self, "yaw", float(self.yaw))
        object.__setattr__(self, "pitch", float(self.pitch))

    @property
    def pos(self) -> np.ndarray:
        return np.asarray(self.position)

    def as_array(self) -> np.ndarray:
        return np.array([*self.position, self.yaw, self.pitch])

    @classmethod
    def from_array(cls, a) -> "Viewpoint":
        return cls(tuple(a[:3]), a[3], a[4])

    def forward(self) -> np.ndarray:
        return camera_basis(self.yaw, self.pitch)[0]


def camera_basis(yaw: float, pitch: float):
    """(forward, right, up) unit vectors of a roll-free camera."""
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    forward = np.array([sy * cp, cy * cp, sp])
    right = np.array([cy, -sy, 0.0])
    up = np.cross(right, forward)
    return forward, right, up


@dataclass(frozen=True)
class CameraConfig:
    hfov_deg: float = 87.0
    vfov_deg: float = 58.0
    width: int = 160
    height: int = 120
    max_range: float = 2.0

    def __post_init__(self):
        if not (0 < self.hfov_deg < 180 and 0 < self.vfov_deg < 180):
            raise ValueError("field of view must lie in (0, 180) degrees")
        if self.width < 2 or self.height < 2:
            raise ValueError("ray grid must be at least 2x2")
        if not self.max_range > 0:
            raise ValueError("max_range must be positive")

    def ray_directions(self, v: Viewpoint) -> np.ndarray:
        """Unit directions through pixel centers, row-major ``(H*W, 3)``."""
        xn, yn = _pixel_plane(self.hfov_deg, self.vfov_deg, self.width, self.height)
        f, r, u = camera_basis(v.yaw, v.pitch)
        d = f[None, :] + xn[:, None] * r[None, :] + yn[:, None] * u[None, :]
        return d / np.linalg.norm(d, axis=1, keepdims=True)


@lru_cache(maxsize=16)
def _pixel_plane(hfov, vfov, w, h):
    tx = math.tan(math.radians(hfov) / 2)
    ty = math.tan(math.radians(vfov) / 2)
    us = ((np.arange(w) + 0.5) / w * 2 - 1) * tx
    vs = (1 - (np.arange(h) + 0.5) / h * 2) * ty
    xn, yn = np.meshgrid(us, vs)
    return xn.ravel(), yn.ravel()


@dataclass(frozen=True)
class RoiBox:
    """Inclusive voxel-index box ``[x0,x1] x [y0,y1] x [z0,z1]``."""

    x0: int
    x1: int
    y0: int
    y1: int
    z0: int
    z1: int

    def __post_init__(self):
        for name in ("x0", "x1", "y0", "y1", "z0", "z1"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.x1 < self.x0 or self.y1 < self.y0 or self.z1 < self.z0:
            raise EmptyRoi(f"empty ROI {self.bounds()}")

    @classmethod
    def whole(cls, spec: GridSpec) -> "RoiBox":
        nx, ny, nz = spec.dims
        return cls(0, nx - 1, 0, ny - 1, 0, nz - 1)

    def bounds(self) -> tuple[int, ...]:
        return (self.x0, self.x1, self.y0, self.y1, self.z0, self.z1)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.x1 - self.x0 + 1, self.y1 - self.y0 + 1, self.z1 - self.z0 + 1)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def slices(self):
        return (slice(self.x0, self.x1 + 1), slice(self.y0, self.y1 + 1), slice(self.z0, self.z1 + 1))

    def check_within(self, spec: GridSpec) -> None:
        nx, ny, nz = spec.dims
        if self.x0 < 0 or self.y0 < 0 or self.z0 < 0 or self.x1 >= nx or self.y1 >= ny or self.z1 >= nz:
            raise EmptyRoi(f"ROI {self.bounds()} exceeds grid {spec.dims}")

    def contains(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        lo = np.array([self.x0, self.y0, self.z0])
        hi = np.array([self.x1, self.y1, self.z1])
        return np.all((idx >= lo) & (idx <= hi), axis=-1)

    def mask(self, dims) -> np.ndarray:
        m = np.zeros(dims, dtype=bool)
        m[self.slices] = True
        return m

    def world_box(self, spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
        lo = spec.lo + np.array([self.x0, self.y0, self.z0]) * spec.resolution
        hi = spec.lo + (np.array([self.x1, self.y1, self.z1]) + 1) * spec.resolution
        return lo, hi

    def volume(self, spec: GridSpec) -> float:
        return self.size * spec.resolution ** 3


@dataclass
class Observation:
    viewpoint: Viewpoint
    depth: np.ndarray  # (H, W) ranges in meters, inf for misses
    hit_ids: np.ndarray  # (H, W) object id per pixel, -1 for misses
    hit_voxels: np.ndarray = field(repr=False)  # (H*W, 3), -1 rows for misses
    new_voxels: int = 0
    coverage: float = 0.0

    def visible_voxels(self, oid: int) -> np.ndarray:
        """Unique voxels of object ``oid`` hit by some pixel of this image."""
        rows = self.hit_voxels[self.hit_ids.ravel() == oid]
        if len(rows) == 0:
            return np.zeros((0, 3), dtype=np.int32)
        return np.unique(rows, axis=0)

    def visible_ids(self) -> list[int]:
        ids = np.unique(self.hit_ids)
        return [int(i) for i in ids if i >= 0]


@dataclass
class RayTraversal:
    voxels: list[tuple[int, int, int]]
    hit_id: int | None
    hit_distance: float


def home_viewpoint(spec: GridSpec) -> Viewpoint:
    """Camera home: robot base at y = 0, centered and level with the scene, looking at its center."""
    c = spec.center
    pos = np.array([c[0], 0.0, c[2]])
    if pos[1] >= spec.lo[1]:
        pos[1] = spec.lo[1] - spec.extent[1]
    return look_at(pos, c)


def look_at(position, target) -> Viewpoint:
    d = np.asarray(target, dtype=float) - np.asarray(position, dtype=float)
    yaw = math.atan2(d[0], d[1])
    pitch = math.atan2(d[2], math.hypot(d[0], d[1]))
    return Viewpoint(tuple(position), yaw, pitch)


def cast_ray(scene: Scene, origin, direction, max_range: float = math.inf) -> RayTraversal:
    """Incremental voxel traversal of a single ray, returning the ordered voxel list."""
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    spec = scene.spec
    start = spec.world_to_index(o)
    if spec.contains_index(start) and scene.truth[tuple(start)] != FREE:
        raise OriginInsideOccupied(f"ray origin {tuple(o)} lies in object {scene.truth[tuple(start)]}")
    lo, hi, res = spec.lo, spec.hi, spec.resolution
    t0, t1 = _raycast.clip_to_box(o, d, lo, hi, max_range)
    out = RayTraversal([], None, math.inf)
    if t0 > t1:
        return out
    dims = spec.dims
    idx = [min(max(int(math.floor((o[a] + t0 * d[a] - lo[a]) / res)), 0), dims[a] - 1) for a in range(3)]
    step = [1 if d[a] > 0 else (-1 if d[a] < 0 else 0) for a in range(3)]
    t_enter = t0
    while t_enter <= max_range:
        out.voxels.append(tuple(idx))
        occ = scene.truth[idx[0], idx[1], idx[2]]
        if occ != FREE:
            out.hit_id, out.hit_distance = int(occ), t_enter
            break
        best, t_best = -1, math.inf
        for a in range(3):
            if step[a]:
                edge = idx[a] + 1 if step[a] > 0 else idx[a]
                ta = (lo[a] + edge * res - o[a]) / d[a]
                if ta < t_best:
                    best, t_best = a, ta
        if best < 0:
            break
        idx[best] += step[best]
        if not 0 <= idx[best] < dims[best]:
            break
        t_enter = t_best
    return out


def _roi_array(roi: RoiBox | None) -> np.ndarray:
    if roi is None:
        return np.array([0, -1, 0, -1, 0, -1], dtype=np.int64)
    return np.array(roi.bounds(), dtype=np.int64)


def check_viewpoint(scene: Scene, v: Viewpoint) -> None:
    p = v.pos
    if not (np.all(np.isfinite(p)) and math.isfinite(v.yaw) and math.isfinite(v.pitch)):
        raise InvalidViewpoint(f"non-finite viewpoint {v}")
    if abs(v.pitch) > math.pi / 2 + 1e-12:
        raise InvalidViewpoint(f"pitch {v.pitch} outside [-pi/2, pi/2]")
    idx = scene.spec.world_to_index(p)
    if scene.spec.contains_index(idx) and scene.truth[tuple(idx)] != FREE:
        raise InvalidViewpoint(f"viewpoint inside object {scene.truth[tuple(idx)]}")


def trace(scene: Scene, v: Viewpoint, camera: CameraConfig, roi: RoiBox | None = None):
    """Run the camera's rays without touching the belief.

    Returns ``(stamp, hit_id, hit_t, hit_vox, new_roi)`` where ``stamp`` marks
    every voxel the rays reached and ``new_roi`` counts the UNKNOWN ROI voxels
    among them.
    """
    check_viewpoint(scene, v)
    dirs = camera.ray_directions(v)
    stamp = np.zeros(scene.spec.dims, dtype=np.uint8)
    hit_id, hit_t, hit_vox, new_roi = _raycast.trace_rays(
        v.pos, dirs, scene.truth, scene.spec.lo, scene.spec.resolution,
        float(camera.max_range), stamp, scene.belief, _roi_array(roi),
    )
    return stamp, hit_id, hit_t, hit_vox, int(new_roi)


def observe(scene: Scene, v: Viewpoint, camera: CameraConfig | None = None,
            roi: RoiBox | None = None) -> Observation:
    """Take a depth image from ``v`` and fold it into the scene belief.

    Coverage in the result refers to ``roi`` or, without one, the whole grid.
    """
    camera = camera or CameraConfig()
    stamp, hit_id, hit_t, hit_vox, _ = trace(scene, v, camera)
    reached = stamp.astype(bool)
    before = int(np.count_nonzero(scene.belief))
    scene.belief[reached & (scene.truth == FREE)] = Belief.OBSERVED_FREE
    hits = hit_vox[hit_id >= 0]
    if len(hits):
        scene.belief[tuple(hits.T)] = Belief.OBSERVED_OCCUPIED
    new = int(np.count_nonzero(scene.belief)) - before
    shape = (camera.height, camera.width)
    return Observation(
        viewpoint=v,
        depth=hit_t.reshape(shape),
        hit_ids=hit_id.reshape(shape),
        hit_voxels=hit_vox,
        new_voxels=new,
        coverage=coverage(scene.belief, roi or RoiBox.whole(scene.spec)),
    )


def coverage(belief: np.ndarray, roi: RoiBox) -> float:
    """Fraction of ROI voxels whose belief is not UNKNOWN."""
    if roi is None:
        raise EmptyRoi("no ROI given")
    block = belief[roi.slices]
    if block.size == 0 or block.size != roi.size:
        raise EmptyRoi(f"ROI {roi.bounds()} selects no voxels of a {belief.shape} grid")
    return np.count_nonzero(block) / block.size


# --------------------------------------------------------------------------
# belief dumps: one header line, then "state:count" runs over C-order voxels

BELIEF_MAGIC = "ROISENSE-BELIEF v1"


def write_belief_dump(belief: np.ndarray, run_dir, step: int) -> str:
    path = os.path.join(run_dir, f"belief_t{step:04d}.v1")
    runs = rle_encode(belief)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{BELIEF_MAGIC} {belief.shape[0]} {belief.shape[1]} {belief.shape[2]}\n")
        fh.write(" ".join(f"{s}:{n}" for s, n in runs))
        fh.write("\n")
    return path


def read_belief_dump(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        body = fh.read().split()
    if " ".join(header[:2]) != BELIEF_MAGIC or len(header) != 5:
        raise ValueError(f"{path}: not a belief dump")
    shape = tuple(int(x) for x in header[2:])
    runs = [[int(a) for a in tok.split(":")] for tok in body]
    return rle_decode(runs, shape)
