"""End-to-end active sensing loop: plan a view, observe, clear blockers, restore, repeat."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .blocking import blocking_score, rank_blockers
from .errors import RoiSenseError
from .language import roi_from_prompt
from .planner import PlannerConfig, gmm_mpc
from .scene import Scene, remove_object, restore_scene
from .scorer import Scorer, ScorerKind, ScorerModel
from .sensing import (
    CameraConfig, Observation, RoiBox, Viewpoint, coverage, home_viewpoint, observe, write_belief_dump,
)

REPORT_VERSION = "v1"


class Strategy(str, Enum):
    VB = "vb"  # blocking score
    RB = "rb"  # random
    NB = "nb"  # nearest


@dataclass
class TimeModel:
    """Declared robot costs; not comparable with real-robot seconds."""

    move_s: float = 5.0
    relocate_s: float = 10.0


@dataclass
class PipelineConfig:
    c_max: float = 0.8
    budget: int = 8
    scorer: ScorerKind = ScorerKind.ORACLE_ROI
    strategy: Strategy = Strategy.VB
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    time: TimeModel = field(default_factory=TimeModel)
    h_min: float | None = None  # defaults to one voxel edge
    seed: int = 0

    def __post_init__(self):
        self.scorer = ScorerKind(self.scorer)
        self.strategy = Strategy(self.strategy)
        if not 0 < self.c_max <= 1:
            raise ValueError("c_max must lie in (0, 1]")
        if self.budget < 1:
            raise ValueError("viewpoint budget must be at least 1")


@dataclass
class Step:
    kind: str  # OBSERVE | REMOVE | RESTORE
    coverage: float
    viewpoint: list[float] | None = None
    object_id: int | None = None
    restored: list[int] | None = None
    blocking_score: float | None = None


@dataclass
class RunReport:
    prompt: str
    success: bool
    reason: str
    unique_viewpoints: int
    objects_moved: int
    final_coverage: float
    synthetic_time_s: float
    planning_wall_s: float
    scorer_evaluations: int
    trace: list[Step] = field(default_factory=list)
    anchor: int | None = None
    roi: list[int] | None = None

    def coverage_curve(self) -> list[float]:
        return [s.coverage for s in self.trace]

    def to_dict(self, include_wall_time: bool = True) -> dict:
        d = asdict(self)
        d["version"] = REPORT_VERSION
        if not include_wall_time:
            d.pop("planning_wall_s")
        return d

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "RunReport":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        if d.pop("version", None) != REPORT_VERSION:
            raise ValueError(f"{path}: unsupported run report version")
        d["trace"] = [Step(**s) for s in d["trace"]]
        return cls(**d)


def select_object(strategy: Strategy | str, scene: Scene, roi: RoiBox, obs: Observation,
                  rng: np.random.Generator | None = None, exclude=(), h_min: float | None = None):
    """Next object to relocate, or ``None`` when the strategy has no candidate."""
    strategy = Strategy(strategy)
    if strategy is Strategy.VB:
        ranked = rank_blockers(scene, roi, obs, h_min, exclude)
        return ranked[0].object_id if ranked else None
    cands = [o for o in obs.visible_ids() if o not in exclude and scene.objects[o].present]
    if not cands:
        return None
    if strategy is Strategy.RB:
        rng = rng if rng is not None else np.random.default_rng()
        return cands[int(rng.integers(len(cands)))]
    cam = obs.viewpoint.pos

    def nearest(oid):
        pts = scene.spec.voxel_centers(obs.visible_voxels(oid))
        return float(np.min(np.linalg.norm(pts - cam, axis=1)))

    return min(cands, key=lambda o: (nearest(o), o))


def make_scorer(cfg: PipelineConfig, model: ScorerModel | None = None) -> Scorer:
    return Scorer(cfg.scorer, model=model, camera=cfg.camera)


def _vkey(v: Viewpoint):
    return (*v.position, v.yaw, v.pitch)


def run_pipeline(scene: Scene, prompt: str, cfg: PipelineConfig | None = None,
                 model: ScorerModel | None = None, dump_dir=None) -> RunReport:
    """Explore the region named by ``prompt``.

    The scene's belief is updated in place; its ground truth is identical
    before and after the call.  Parse, grounding and ROI errors end the run
    as a failure with the error class name as ``reason``.
    """
    cfg = cfg or PipelineConfig()
    scorer = make_scorer(cfg, model)
    rng = np.random.default_rng(cfg.seed)
    trace: list[Step] = []
    seen: set = set()
    n_obs = n_moved = n_restored = 0
    planning = 0.0
    dump_step = 0

    def look(v: Viewpoint, roi):
        nonlocal n_obs, dump_step
        obs = observe(scene, v, cfg.camera, roi)
        seen.add(_vkey(v))
        n_obs += 1
        if dump_dir is not None:
            write_belief_dump(scene.belief, dump_dir, dump_step)
            dump_step += 1
        return obs

    def report(success, reason, cov, anchor=None, roi=None):
        return RunReport(
            prompt=prompt, success=success, reason=reason, unique_viewpoints=len(seen),
            objects_moved=n_moved, final_coverage=float(cov),
            synthetic_time_s=cfg.time.move_s * n_obs + cfg.time.relocate_s * (n_moved + n_restored),
            planning_wall_s=planning, scorer_evaluations=scorer.evaluations, trace=trace,
            anchor=anchor, roi=list(roi.bounds()) if roi is not None else None,
        )

    v0 = home_viewpoint(scene.spec)
    obs = look(v0, None)
    trace.append(Step("OBSERVE", float("nan"), list(_vkey(v0))))
    try:
        _, anchor, roi = roi_from_prompt(scene, prompt)
    except RoiSenseError as exc:
        trace[0].coverage = 0.0
        return report(False, type(exc).__name__, 0.0)

    c = coverage(scene.belief, roi)
    trace[0].coverage = c
    round_no = 0
    while c < cfg.c_max and len(seen) < cfg.budget:
        round_no += 1
        t0 = time.perf_counter()
        plan = gmm_mpc(scene, roi, scorer, cfg.planner.with_seed(cfg.seed * 1000 + round_no))
        planning += time.perf_counter() - t0
        v = plan.viewpoint
        obs = look(v, roi)
        c = obs.coverage
        trace.append(Step("OBSERVE", c, list(_vkey(v))))
        while c < cfg.c_max:
            t0 = time.perf_counter()
            oid = select_object(cfg.strategy, scene, roi, obs, rng, exclude=(anchor,), h_min=cfg.h_min)
            planning += time.perf_counter() - t0
            if oid is None:
                break
            h = blocking_score(scene, roi, obs, oid)
            remove_object(scene, oid, reset_belief=False)
            n_moved += 1
            trace.append(Step("REMOVE", c, object_id=oid, blocking_score=h))
            obs = look(v, roi)
            c = obs.coverage
            trace.append(Step("OBSERVE", c, list(_vkey(v))))
        if scene.staging:
            restored = list(scene.staging)
            restore_scene(scene)
            n_restored += len(restored)
            trace.append(Step("RESTORE", c, restored=restored))
    success = c >= cfg.c_max and len(seen) <= cfg.budget
    reason = "coverage reached" if success else "viewpoint budget exhausted"
    return report(success, reason, c, anchor, roi)
