"""Viewpoint optimisation with a Gaussian-mixture cross-entropy loop.

Viewpoints are encoded as 5-vectors ``(x, y, z, yaw, pitch)``; inside the
optimiser positions are scaled by the grid extent so one spread value means
the same thing along every axis.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyViewpointSpace, NoElites
from .scene import FREE, Belief, Scene
from .sensing import RoiBox, Viewpoint

SIGMA_MIN = 1e-3
WEIGHT_EPS = 1e-3


@dataclass
class ViewpointSpace:
    """Valid camera poses: observed free voxels plus a frontal approach box.

    The approach box is one shelf-depth deep in front of the opening and spans
    the full width and height of the grid.
    """

    scene: Scene
    yaw_bounds: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    pitch_bounds: tuple[float, float] = (-math.pi / 4, math.pi / 4)
    free_idx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.yaw_bounds[0] > self.yaw_bounds[1] or self.pitch_bounds[0] > self.pitch_bounds[1]:
            raise EmptyViewpointSpace("empty yaw or pitch interval")
        s = self.scene
        mask = (s.belief == Belief.OBSERVED_FREE) & (s.truth == FREE)
        self.free_idx = np.argwhere(mask)
        spec = s.spec
        self.front_lo = spec.lo - np.array([0.0, spec.extent[1], 0.0])
        self.front_hi = np.array([spec.hi[0], spec.lo[1], spec.hi[2]])
        front_vol = float(np.prod(self.front_hi - self.front_lo))
        free_vol = len(self.free_idx) * spec.resolution ** 3
        if front_vol + free_vol <= 0:
            raise EmptyViewpointSpace("no valid camera position")
        self.p_front = front_vol / (front_vol + free_vol)

    # encoding -------------------------------------------------------------
    @property
    def scale(self) -> np.ndarray:
        return np.concatenate([self.scene.spec.extent, [1.0, 1.0]])

    @property
    def offset(self) -> np.ndarray:
        return np.concatenate([self.scene.spec.lo, [0.0, 0.0]])

    def encode(self, a) -> np.ndarray:
        return (np.asarray(a, dtype=float) - self.offset) / self.scale

    def decode(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float) * self.scale + self.offset

    # membership and sampling ----------------------------------------------
    def contains(self, a) -> np.ndarray:
        """Validity of raw ``(n, 5)`` viewpoint arrays."""
        a = np.atleast_2d(a)
        spec = self.scene.spec
        pos = a[:, :3]
        ok = (
            (a[:, 3] >= self.yaw_bounds[0]) & (a[:, 3] <= self.yaw_bounds[1])
            & (a[:, 4] >= self.pitch_bounds[0]) & (a[:, 4] <= self.pitch_bounds[1])
            & np.all(np.isfinite(a), axis=1)
        )
        in_front = np.all((pos >= self.front_lo) & (pos < self.front_hi), axis=1)
        idx = spec.world_to_index(np.where(np.isfinite(pos), pos, 0.0))
        in_grid = spec.contains_index(idx)
        free = np.zeros(len(a), dtype=bool)
        if np.any(in_grid):
            g = tuple(idx[in_grid].T)
            free[in_grid] = (self.scene.belief[g] == Belief.OBSERVED_FREE) & (self.scene.truth[g] == FREE)
        return ok & (in_front | free)

    def _draw(self, n, rng) -> np.ndarray:
        spec = self.scene.spec
        out = np.empty((n, 5))
        front = rng.random(n) < self.p_front if len(self.free_idx) else np.ones(n, dtype=bool)
        nf = int(front.sum())
        out[front, :3] = self.front_lo + rng.random((nf, 3)) * (self.front_hi - self.front_lo)
        if n - nf:
            pick = self.free_idx[rng.integers(len(self.free_idx), size=n - nf)]
            out[~front, :3] = spec.lo + (pick + rng.random((n - nf, 3))) * spec.resolution
        out[:, 3] = rng.uniform(*self.yaw_bounds, size=n)
        out[:, 4] = rng.uniform(*self.pitch_bounds, size=n)
        return out

    def sample(self, n: int, rng, budget: int = 50) -> np.ndarray:
        """``n`` uniform valid raw viewpoints by rejection."""
        got = np.empty((0, 5))
        for _ in range(budget):
            cand = self._draw(max(n - len(got), 1) * 2, rng)
            got = np.vstack([got, cand[self.contains(cand)]])
            if len(got) >= n:
                return got[:n]
        raise EmptyViewpointSpace(f"rejection sampling found only {len(got)} of {n} valid viewpoints")


def sample_uniform_viewpoints(scene: Scene, count: int, seed=0, space: ViewpointSpace | None = None) -> list[Viewpoint]:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    space = space or ViewpointSpace(scene)
    return [Viewpoint.from_array(a) for a in space.sample(count, rng)]


# --------------------------------------------------------------------------
# mixture


@dataclass
class GmmState:
    means: np.ndarray  # (N, 5) encoded
    stds: np.ndarray  # (N, 5)
    weights: np.ndarray  # (N,)

    @property
    def n(self) -> int:
        return len(self.weights)

    def log_component_density(self, x) -> np.ndarray:
        """``(K, N)`` log-density of each point under each component, ignoring weights."""
        x = np.atleast_2d(x)
        z = (x[:, None, :] - self.means[None]) / self.stds[None]
        return -0.5 * np.sum(z * z, axis=2) - np.sum(np.log(self.stds), axis=1)[None] - 2.5 * math.log(2 * math.pi)

    def sample(self, n: int, rng) -> np.ndarray:
        comp = rng.choice(self.n, size=n, p=self.weights)
        return self.means[comp] + rng.standard_normal((n, self.means.shape[1])) * self.stds[comp]

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist(), "weights": self.weights.tolist()}


def fit_gmm(elites, prev: GmmState, sigma_min: float = SIGMA_MIN) -> GmmState:
    """Hard-assignment refit of ``prev`` to the elite set.

    Each elite joins the component under which it is most likely.  Components
    with two or more members take their sample mean and per-dimension std;
    the others keep their mean and halve their std.  Weights follow member
    counts, with empty components kept alive at a small weight.
    """
    x = np.atleast_2d(np.asarray(elites, dtype=float))
    if x.size == 0:
        raise NoElites("no elite samples to fit")
    assign = np.argmax(prev.log_component_density(x), axis=1)
    means = prev.means.copy()
    stds = prev.stds.copy()
    counts = np.bincount(assign, minlength=prev.n).astype(float)
    for k in range(prev.n):
        members = x[assign == k]
        if len(members) >= 2:
            means[k] = members.mean(axis=0)
            stds[k] = members.std(axis=0)
        else:
            stds[k] = stds[k] * 0.5
    stds = np.maximum(stds, sigma_min)
    w = np.where(counts > 0, counts, WEIGHT_EPS)
    return GmmState(means, stds, w / w.sum())


# --------------------------------------------------------------------------
# planner


@dataclass
class PlannerConfig:
    n_uniform: int = 256  # S
    batch: int = 128  # B
    n_elite: int = 32  # K
    iterations: int = 5  # M
    n_components: int = 7  # N
    seed: int = 0
    sigma_pos: float = 0.1
    sigma_ang: float = 0.3
    resample_budget: int = 20

    def validate(self) -> None:
        if not self.n_elite <= self.batch:
            raise ValueError("elite count K must not exceed batch size B")
        if not self.n_components <= self.n_uniform:
            raise ValueError("component count N must not exceed uniform sample count S")
        if self.iterations < 1 or self.n_components < 1 or self.n_elite < 1:
            raise ValueError("M, N and K must be at least 1")

    def with_seed(self, seed: int) -> "PlannerConfig":
        return PlannerConfig(**{**self.__dict__, "seed": int(seed)})


@dataclass
class PlanResult:
    viewpoint: Viewpoint
    score: float
    evaluations: int
    best_uniform_score: float
    final_elites: list[Viewpoint]
    trace: list[dict]

    def write_trace(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.trace:
                fh.write(json.dumps(rec) + "\n")


def _sample_mixture(gmm: GmmState, space: ViewpointSpace, n: int, rng, budget: int) -> np.ndarray:
    got = np.empty((0, 5))
    for _ in range(budget):
        raw = space.decode(gmm.sample(n - len(got), rng))
        raw[:, 3] = np.clip(raw[:, 3], *space.yaw_bounds)
        raw[:, 4] = np.clip(raw[:, 4], *space.pitch_bounds)
        got = np.vstack([got, raw[space.contains(raw)]])
        if len(got) >= n:
            return got[:n]
    # mixture mass sits mostly on invalid poses: top up uniformly
    return np.vstack([got, space.sample(n - len(got), rng)])


def _views(a) -> list[Viewpoint]:
    return [Viewpoint.from_array(r) for r in a]


def gmm_mpc(scene: Scene, roi: RoiBox, scorer, cfg: PlannerConfig | None = None,
            space: ViewpointSpace | None = None) -> PlanResult:
    """Best next viewpoint for covering ``roi``.

    ``scorer(scene, roi, viewpoints)`` returns one score per viewpoint.  The
    result is the argmax over every candidate evaluated during the run.
    """
    cfg = cfg or PlannerConfig()
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    space = space or ViewpointSpace(scene)

    cand = space.sample(cfg.n_uniform, rng)
    scores = np.asarray(scorer(scene, roi, _views(cand)), dtype=float)
    all_x, all_s = [cand], [scores]
    best_uniform = float(scores.max())

    order = np.argsort(-scores, kind="stable")[: cfg.n_components]
    sig = np.array([cfg.sigma_pos] * 3 + [cfg.sigma_ang] * 2)
    gmm = GmmState(space.encode(cand[order]), np.tile(sig, (len(order), 1)), np.full(len(order), 1.0 / len(order)))
    trace = []
    elites = cand[order]
    for it in range(cfg.iterations):
        batch = _sample_mixture(gmm, space, cfg.batch, rng, cfg.resample_budget)
        s = np.asarray(scorer(scene, roi, _views(batch)), dtype=float)
        all_x.append(batch)
        all_s.append(s)
        top = np.argsort(-s, kind="stable")[: cfg.n_elite]
        elites = batch[top]
        gmm = fit_gmm(space.encode(elites), gmm)
        trace.append({"iteration": it + 1, "elite_scores": s[top].tolist(), **gmm.to_dict()})

    xs = np.vstack(all_x)
    ss = np.concatenate(all_s)
    best = int(np.argmax(ss))
    return PlanResult(
        viewpoint=Viewpoint.from_array(xs[best]),
        score=float(ss[best]),
        evaluations=len(ss),
        best_uniform_score=best_uniform,
        final_elites=_views(elites),
        trace=trace,
    )
