"""Dual-layer voxel scenes: ground-truth occupancy plus the belief built by observation.

Frame convention: X is width (rightward as seen from the camera home pose),
Y is depth into the shelf and Z is up.  The robot base sits at the world
origin; the shelf opening is the ``y = origin[1]`` face of the grid.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import (
    AlreadyRemoved,
    DegenerateShape,
    MalformedDocument,
    PlacementFailure,
    UnknownObject,
)

FREE = -1
DOC_VERSION = "v1"


class Belief(IntEnum):
    UNKNOWN = 0
    OBSERVED_FREE = 1
    OBSERVED_OCCUPIED = 2


@dataclass(frozen=True)
class GridSpec:
    dims: tuple[int, int, int]
    resolution: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"grid dims must be three positive ints, got {self.dims}")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.dims, dtype=float) * self.resolution

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.extent

    @property
    def center(self) -> np.ndarray:
        return self.lo + 0.5 * self.extent

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.dims))

    def voxel_centers(self, idx) -> np.ndarray:
        """World-space centers for an ``(..., 3)`` array of voxel indices."""
        return self.lo + (np.asarray(idx, dtype=float) + 0.5) * self.resolution

    def world_to_index(self, p) -> np.ndarray:
        return np.floor((np.asarray(p, dtype=float) - self.lo) / self.resolution).astype(int)

    def contains_index(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        return np.all((idx >= 0) & (idx < np.asarray(self.dims)), axis=-1)


@dataclass
class SceneObject:
    id: int
    shape: str  # "box" | "cylinder"
    position: tuple[float, float, float]  # world center of the primitive
    yaw: float
    size: tuple[float, ...]  # box: (sx, sy, sz); cylinder: (radius, height)
    color_label: str
    shape_label: str
    category: str = "small"
    voxels: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int32), repr=False)
    present: bool = True

    @property
    def labels(self) -> set[str]:
        return {self.color_label.lower(), self.shape_label.lower()}

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Inclusive voxel-index bounding box of the object."""
        return self.voxels.min(axis=0), self.voxels.max(axis=0)


def voxelize_object(obj: SceneObject, spec: GridSpec) -> np.ndarray:
    """Indices of every voxel whose center lies inside the posed primitive, clipped to the grid."""
    size = np.asarray(obj.size, dtype=float)
    if obj.shape == "box":
        if size.shape != (3,):
            raise DegenerateShape(f"box needs 3 size parameters, got {obj.size}")
    elif obj.shape == "cylinder":
        if size.shape != (2,):
            raise DegenerateShape(f"cylinder needs (radius, height), got {obj.size}")
    else:
        raise DegenerateShape(f"unknown primitive {obj.shape!r}")
    if np.any(~(size > 0)):
        raise DegenerateShape(f"object {obj.id}: size parameters must be > 0, got {obj.size}")

    p = np.asarray(obj.position, dtype=float)
    if obj.shape == "box":
        half_xy = 0.5 * np.hypot(size[0], size[1])
        half = np.array([half_xy, half_xy, 0.5 * size[2]])
    else:
        half = np.array([size[0], size[0], 0.5 * size[1]])
    lo = np.maximum(spec.world_to_index(p - half), 0)
    hi = np.minimum(spec.world_to_index(p + half), np.asarray(spec.dims) - 1)
    if np.any(hi < lo):
        return np.zeros((0, 3), dtype=np.int32)

    ii, jj, kk = np.meshgrid(
        np.arange(lo[0], hi[0] + 1),
        np.arange(lo[1], hi[1] + 1),
        np.arange(lo[2], hi[2] + 1),
        indexing="ij",
    )
    idx = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    rel = spec.voxel_centers(idx) - p
    c, s = np.cos(obj.yaw), np.sin(obj.yaw)
    lx = c * rel[:, 0] + s * rel[:, 1]
    ly = -s * rel[:, 0] + c * rel[:, 1]
    lz = rel[:, 2]
    if obj.shape == "box":
        inside = (np.abs(lx) <= 0.5 * size[0]) & (np.abs(ly) <= 0.5 * size[1]) & (np.abs(lz) <= 0.5 * size[2])
    else:
        inside = (lx * lx + ly * ly <= size[0] ** 2) & (np.abs(lz) <= 0.5 * size[1])
    return idx[inside].astype(np.int32)


class Scene:
    """Ground truth, belief and the object registry of one confined scene.

    ``truth`` holds the occupying object id per voxel (``FREE`` = -1) and
    ``belief`` holds :class:`Belief` codes as int8.
    """

    def __init__(self, spec: GridSpec, objects=(), staging=(), belief=None):
        self.spec = spec
        self.truth = np.full(spec.dims, FREE, dtype=np.int32)
        self.belief = (
            np.zeros(spec.dims, dtype=np.int8) if belief is None else np.asarray(belief, dtype=np.int8).copy()
        )
        if self.belief.shape != spec.dims:
            raise ValueError("belief shape does not match grid dims")
        self.objects: dict[int, SceneObject] = {}
        self.staging: list[int] = []
        for obj in objects:
            self.add_object(obj)
        for oid in staging:
            self._stage(oid)

    def add_object(self, obj: SceneObject) -> None:
        if obj.id in self.objects:
            raise ValueError(f"duplicate object id {obj.id}")
        if len(obj.voxels) == 0:
            obj.voxels = voxelize_object(obj, self.spec)
        if len(obj.voxels) == 0:
            raise DegenerateShape(f"object {obj.id} occupies no voxel of the grid")
        if obj.present:
            occ = self.truth[tuple(obj.voxels.T)]
            if np.any(occ != FREE):
                other = int(occ[occ != FREE][0])
                raise ValueError(f"object {obj.id} overlaps object {other}")
            self.truth[tuple(obj.voxels.T)] = obj.id
        self.objects[obj.id] = obj

    def _stage(self, oid: int) -> None:
        obj = self.objects[oid]
        if obj.present:
            self.truth[tuple(obj.voxels.T)] = FREE
            obj.present = False
        if oid not in self.staging:
            self.staging.append(oid)

    @property
    def present_ids(self) -> list[int]:
        return sorted(i for i, o in self.objects.items() if o.present)

    def copy(self) -> "Scene":
        return copy.deepcopy(self)

    def observed_ids(self) -> list[int]:
        """Present objects with at least one OBSERVED_OCCUPIED voxel."""
        ids = []
        for oid in self.present_ids:
            obj = self.objects[oid]
            if np.any(self.belief[tuple(obj.voxels.T)] == Belief.OBSERVED_OCCUPIED):
                ids.append(oid)
        return ids


def remove_object(scene: Scene, oid: int, reset_belief: bool = True) -> Scene:
    """Stage object ``oid`` outside the grid.

    With ``reset_belief`` the object's former voxels go back to UNKNOWN since
    the scene changed there; all other belief is untouched.
    """
    if oid not in scene.objects:
        raise UnknownObject(oid)
    obj = scene.objects[oid]
    if not obj.present:
        raise AlreadyRemoved(oid)
    scene._stage(oid)
    if reset_belief:
        scene.belief[tuple(obj.voxels.T)] = Belief.UNKNOWN
    return scene


def restore_scene(scene: Scene) -> Scene:
    """Put every staged object back at its original pose; belief is kept."""
    for oid in scene.staging:
        obj = scene.objects[oid]
        scene.truth[tuple(obj.voxels.T)] = oid
        obj.present = True
    scene.staging = []
    return scene


# --------------------------------------------------------------------------
# generation


@dataclass
class GenParams:
    width: tuple[float, float] = (0.70, 1.40)
    height: tuple[float, float] = (0.25, 0.40)
    depth: tuple[float, float] = (0.50, 1.00)
    standoff: tuple[float, float] = (0.30, 0.70)
    elevation: tuple[float, float] = (0.30, 0.60)
    object_count: tuple[int, int] = (10, 20)
    large_fraction: tuple[float, float] = (0.25, 0.40)
    large_footprint: tuple[float, float] = (0.08, 0.16)
    large_height: tuple[float, float] = (0.15, 0.30)
    small_footprint: tuple[float, float] = (0.03, 0.07)
    small_height: tuple[float, float] = (0.05, 0.12)
    # large-object depth is drawn as u**front_bias of the free depth, u uniform
    front_bias: float = 3.0
    resolution: float = 0.02
    colors: tuple[str, ...] = (
        "red", "green", "blue", "yellow", "purple", "pink",
        "orange", "white", "black", "brown", "gray", "cyan",
    )
    shapes: tuple[str, ...] = ("box", "cylinder")
    seed: int = 0
    max_attempts: int = 1000

    def validate(self) -> None:
        ranges = {
            k: getattr(self, k)
            for k in ("width", "height", "depth", "standoff", "elevation", "object_count",
                      "large_fraction", "large_footprint", "large_height",
                      "small_footprint", "small_height")
        }
        for name, (lo, hi) in ranges.items():
            if lo > hi:
                raise ValueError(f"GenParams.{name}: lower bound {lo} exceeds upper bound {hi}")
        if min(self.width[0], self.height[0], self.depth[0], self.resolution) <= 0:
            raise ValueError("scene dimensions and resolution must be positive")
        if self.object_count[0] < 0:
            raise ValueError("object count must be nonnegative")
        if not self.colors or not self.shapes:
            raise ValueError("color and shape vocabularies must be nonempty")
        if not self.front_bias >= 1:
            raise ValueError("front_bias must be at least 1")


def generate_scene(params: GenParams | None = None, seed: int | None = None) -> Scene:
    """Random shelf scene; deterministic for a fixed ``(params, seed)``."""
    params = params or GenParams()
    params.validate()
    rng = np.random.default_rng(params.seed if seed is None else seed)
    res = params.resolution

    def dim(r):
        return max(1, int(round(rng.uniform(*r) / res)))

    nx, ny, nz = dim(params.width), dim(params.depth), dim(params.height)
    standoff = rng.uniform(*params.standoff)
    elevation = rng.uniform(*params.elevation)
    spec = GridSpec((nx, ny, nz), res, (-0.5 * nx * res, standoff, elevation))
    scene = Scene(spec)
    W, D, H = spec.extent

    count = int(rng.integers(params.object_count[0], params.object_count[1] + 1))
    n_large = int(round(count * rng.uniform(*params.large_fraction)))
    categories = ["large"] * n_large + ["small"] * (count - n_large)

    used: set[tuple[str, str]] = set()
    for oid, category in enumerate(categories):
        shape = params.shapes[int(rng.integers(len(params.shapes)))]
        free_colors = [c for c in params.colors if (c, shape) not in used]
        pool = free_colors or list(params.colors)
        color = pool[int(rng.integers(len(pool)))]
        used.add((color, shape))
        fp = params.large_footprint if category == "large" else params.small_footprint
        hr = params.large_height if category == "large" else params.small_height
        for _ in range(params.max_attempts):
            h = min(rng.uniform(*hr), H - res)
            yaw = rng.uniform(-np.pi, np.pi)
            if shape == "box":
                size = (rng.uniform(*fp), rng.uniform(*fp), h)
                reach = 0.5 * np.hypot(size[0], size[1])
            else:
                size = (0.5 * rng.uniform(*fp), h)
                reach = size[0]
            if 2 * reach >= min(W, D):
                continue
            x = rng.uniform(reach, W - reach)
            u = rng.random()
            if category == "large":
                u = u ** params.front_bias
            y = reach + u * (D - 2 * reach)
            pos = (spec.origin[0] + x, spec.origin[1] + y, spec.origin[2] + 0.5 * h)
            obj = SceneObject(oid, shape, pos, float(yaw), tuple(float(s) for s in size),
                              color, shape, category)
            vox = voxelize_object(obj, spec)
            if len(vox) == 0 or np.any(scene.truth[tuple(vox.T)] != FREE):
                continue
            obj.voxels = vox
            scene.add_object(obj)
            break
        else:
            raise PlacementFailure(
                f"could not place object {oid} ({category} {shape}) in {params.max_attempts} attempts"
            )
    return scene


# --------------------------------------------------------------------------
# serialization


def rle_encode(states: np.ndarray) -> list[list[int]]:
    flat = np.asarray(states).ravel()
    if flat.size == 0:
        return []
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [flat.size]]))
    return [[int(flat[s]), int(n)] for s, n in zip(starts, lengths)]


def rle_decode(runs, shape) -> np.ndarray:
    values = np.array([r[0] for r in runs], dtype=np.int8)
    counts = np.array([r[1] for r in runs], dtype=np.int64)
    if counts.sum() != int(np.prod(shape)):
        raise ValueError(f"run lengths sum to {counts.sum()}, expected {int(np.prod(shape))}")
    return np.repeat(values, counts).reshape(shape)


def scene_to_dict(scene: Scene, include_belief: bool = False) -> dict:
    doc = {
        "version": DOC_VERSION,
        "spec": {
            "dims": list(scene.spec.dims),
            "resolution": scene.spec.resolution,
            "origin": list(scene.spec.origin),
        },
        "objects": [
            {
                "id": o.id,
                "shape": o.shape,
                "pose": {"position": list(o.position), "yaw": o.yaw},
                "size": list(o.size),
                "color_label": o.color_label,
                "shape_label": o.shape_label,
                "category": o.category,
            }
            for o in (scene.objects[i] for i in sorted(scene.objects))
        ],
        "staging": list(scene.staging),
    }
    if include_belief:
        doc["belief"] = rle_encode(scene.belief)
    return doc


def save_scene(scene: Scene, path=None, include_belief: bool = False) -> str:
    text = json.dumps(scene_to_dict(scene, include_belief), indent=1)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise MalformedDocument(f"{where}: missing field '{key}'")
    return d[key]


def scene_from_dict(doc: dict) -> Scene:
    if _need(doc, "version", "document") != DOC_VERSION:
        raise MalformedDocument(f"version: unsupported {doc['version']!r}, expected {DOC_VERSION!r}")
    sd = _need(doc, "spec", "document")
    try:
        spec = GridSpec(tuple(_need(sd, "dims", "spec")), float(_need(sd, "resolution", "spec")),
                        tuple(_need(sd, "origin", "spec")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedDocument):
            raise
        raise MalformedDocument(f"spec: {exc}") from exc
    objects = []
    for i, od in enumerate(_need(doc, "objects", "document")):
        where = f"objects[{i}]"
        try:
            pose = _need(od, "pose", where)
            obj = SceneObject(
                id=int(_need(od, "id", where)),
                shape=str(_need(od, "shape", where)),
                position=tuple(float(v) for v in _need(pose, "position", where + ".pose")),
                yaw=float(_need(pose, "yaw", where + ".pose")),
                size=tuple(float(v) for v in _need(od, "size", where)),
                color_label=str(_need(od, "color_label", where)),
                shape_label=str(_need(od, "shape_label", where)),
                category=str(od.get("category", "small")),
            )
            if len(obj.position) != 3:
                raise MalformedDocument(f"{where}.pose.position: expected 3 coordinates")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, MalformedDocument):
                raise
            raise MalformedDocument(f"{where}: {exc}") from exc
        objects.append(obj)
    staging = [int(s) for s in doc.get("staging", [])]
    belief = None
    if "belief" in doc:
        try:
            belief = rle_decode(doc["belief"], spec.dims)
        except (TypeError, ValueError, IndexError) as exc:
            raise MalformedDocument(f"belief: {exc}") from exc
    scene = Scene(spec, belief=belief)
    for i, obj in enumerate(objects):
        try:
            scene.add_object(obj)
        except (ValueError, DegenerateShape) as exc:
            raise MalformedDocument(f"objects[{i}]: {exc}") from exc
    for oid in staging:
        if oid not in scene.objects:
            raise MalformedDocument(f"staging: unknown object id {oid}")
        scene._stage(oid)
    return scene


def load_scene(source) -> Scene:
    """Load from a path, a JSON string or an already-parsed dict."""
    if isinstance(source, dict):
        return scene_from_dict(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scene_from_dict(doc)
