"""Training data for the surrogate: random rollouts in generated scenes.

Each rollout generates a scene, takes the home image, picks a random anchor
and direction for the ROI, then moves the camera to up to five random valid
viewpoints.  Every move yields one sample whose target is the ROI coverage
realised after that observation.

Samples store the pooled feature vector rather than the full belief grid.

Dataset file: ``numpy.savez`` archive with ``version`` (="v1"), ``digest``
(sha256 over features, targets and split), ``features`` (float32, n x 4103),
``targets``, ``pre_coverage``, ``split`` (0 train, 1 val, 2 test), ``rois``
(n x 6), ``viewpoints`` (n x 5), ``dims`` (n x 3) and ``scene_seeds``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyRoi
from ..language import Direction, build_roi
from ..planner import ViewpointSpace
from ..scene import GenParams, generate_scene
from ..sensing import CameraConfig, RoiBox, Viewpoint, coverage, home_viewpoint, observe
from .features import FEATURE_LEN, extract_features

DATASET_VERSION = "v1"
TRAIN, VAL, TEST = 0, 1, 2
SPLIT_FRACTIONS = (0.8, 0.1, 0.1)


@dataclass
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    pre_coverage: np.ndarray
    split: np.ndarray
    rois: np.ndarray
    viewpoints: np.ndarray
    dims: np.ndarray
    scene_seeds: np.ndarray

    def __len__(self):
        return len(self.targets)

    def part(self, which: int):
        m = self.split == which
        return self.features[m], self.targets[m]

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in (self.features, self.targets, self.split):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            np.savez(
                fh, version=DATASET_VERSION, digest=self.digest(), features=self.features,
                targets=self.targets, pre_coverage=self.pre_coverage, split=self.split,
                rois=self.rois, viewpoints=self.viewpoints, dims=self.dims, scene_seeds=self.scene_seeds,
            )

    @classmethod
    def load(cls, path) -> "Dataset":
        with np.load(path, allow_pickle=False) as z:
            if str(z["version"]) != DATASET_VERSION:
                raise ValueError(f"{path}: unsupported dataset version {z['version']}")
            ds = cls(**{k: z[k] for k in ("features", "targets", "pre_coverage", "split",
                                          "rois", "viewpoints", "dims", "scene_seeds")})
            if ds.digest() != str(z["digest"]):
                raise ValueError(f"{path}: digest mismatch, file is corrupt")
        return ds


def split_assignment(n: int, seed: int) -> np.ndarray:
    """Exact 80/10/10 split ranked by a per-sample hash."""
    keys = [hashlib.sha256(f"{seed}:{i}".encode()).digest() for i in range(n)]
    order = sorted(range(n), key=keys.__getitem__)
    n_train = int(round(SPLIT_FRACTIONS[0] * n))
    n_val = int(round(SPLIT_FRACTIONS[1] * n))
    split = np.full(n, TEST, dtype=np.int8)
    split[order[:n_train]] = TRAIN
    split[order[n_train:n_train + n_val]] = VAL
    return split


def random_roi(scene, rng, tries: int = 50) -> RoiBox:
    ids = scene.present_ids
    dirs = list(Direction)
    for _ in range(tries):
        anchor = ids[int(rng.integers(len(ids)))]
        direction = dirs[int(rng.integers(len(dirs)))]
        try:
            return build_roi(scene, anchor, direction)
        except EmptyRoi:
            continue
    raise EmptyRoi("no anchor/direction pair gives a nonempty ROI")


def generate_dataset(n: int, params: GenParams | None = None, seed: int = 0,
                     camera: CameraConfig | None = None, max_rollout: int = 5,
                     progress=None) -> Dataset:
    if n < 1:
        raise ValueError("n must be at least 1")
    params = params or GenParams()
    camera = camera or CameraConfig()
    rng = np.random.default_rng(seed)
    feats = np.empty((n, FEATURE_LEN), dtype=np.float32)
    targets = np.empty(n)
    pre = np.empty(n)
    rois = np.empty((n, 6), dtype=np.int32)
    views = np.empty((n, 5))
    dims = np.empty((n, 3), dtype=np.int32)
    seeds = np.empty(n, dtype=np.int64)
    i = 0
    while i < n:
        scene_seed = int(rng.integers(2**31 - 1))
        scene = generate_scene(params, scene_seed)
        observe(scene, home_viewpoint(scene.spec), camera)
        if not scene.present_ids:
            continue
        roi = random_roi(scene, rng)
        for _ in range(int(rng.integers(1, max_rollout + 1))):
            if i >= n:
                break
            v = Viewpoint.from_array(ViewpointSpace(scene).sample(1, rng)[0])
            feats[i] = extract_features(scene.belief, roi, v, scene.spec)
            pre[i] = coverage(scene.belief, roi)
            targets[i] = observe(scene, v, camera, roi).coverage
            rois[i] = roi.bounds()
            views[i] = v.as_array()
            dims[i] = scene.spec.dims
            seeds[i] = scene_seed
            i += 1
            if progress is not None:
                progress(i, n)
    return Dataset(feats, targets, pre, split_assignment(n, seed), rois, views, dims, seeds)
