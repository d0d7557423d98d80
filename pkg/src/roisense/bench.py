"""Method comparison over generated scene sets, with region-density stratification."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRoi
from .language import Direction, build_roi, make_prompt, visible_anchor_choices
from .pipeline import PipelineConfig, RunReport, Strategy, TimeModel, run_pipeline
from .planner import PlannerConfig
from .scene import Scene, save_scene
from .scorer import ScorerKind, ScorerModel
from .sensing import CameraConfig, RoiBox, home_viewpoint, observe

BENCH_VERSION = "v1"


@dataclass(frozen=True)
class MethodSpec:
    name: str
    scorer: ScorerKind
    strategy: Strategy


def method_table(oracle: bool = False) -> dict[str, MethodSpec]:
    roi = ScorerKind.ORACLE_ROI if oracle else ScorerKind.LEARNED_ROI
    whole = ScorerKind.ORACLE_SCENE if oracle else ScorerKind.LEARNED_SCENE
    return {
        "ours": MethodSpec("ours", roi, Strategy.VB),
        "rs-rb": MethodSpec("rs-rb", roi, Strategy.RB),
        "rs-nb": MethodSpec("rs-nb", roi, Strategy.NB),
        "s-vb": MethodSpec("s-vb", whole, Strategy.VB),
        "s-nb": MethodSpec("s-nb", whole, Strategy.NB),
    }


def bench_camera() -> CameraConfig:
    return CameraConfig(width=80, height=60)


def bench_planner() -> PlannerConfig:
    return PlannerConfig(n_uniform=96, batch=48, n_elite=12, iterations=3, n_components=7)


@dataclass
class BenchConfig:
    c_max: float = 0.8
    budget: int = 8
    camera: CameraConfig = field(default_factory=bench_camera)
    planner: PlannerConfig = field(default_factory=bench_planner)
    time: TimeModel = field(default_factory=TimeModel)
    workers: int | None = None  # None: ARS_THREADS or 1


def region_density(scene: Scene, roi: RoiBox) -> float:
    """Objects with at least one voxel inside ``roi`` per cubic meter of ROI."""
    if roi.size <= 0:
        raise EmptyRoi("empty ROI")
    n = sum(1 for oid in scene.present_ids if np.any(roi.contains(scene.objects[oid].voxels)))
    return n / roi.volume(scene.spec)


def scene_digest(scene: Scene) -> str:
    return hashlib.sha256(save_scene(scene).encode()).hexdigest()[:16]


def make_task(scene: Scene, seed: int, camera: CameraConfig | None = None):
    """Prompt for a scene: a uniquely labelled anchor visible from home plus a random direction."""
    rng = np.random.default_rng(seed)
    probe = scene.copy()
    observe(probe, home_viewpoint(probe.spec), camera)
    choices = visible_anchor_choices(probe)
    pairs = [(a, d) for a in choices for d in Direction]
    for k in rng.permutation(len(pairs)):
        a, d = pairs[k]
        try:
            roi = build_roi(probe, a, d)
        except EmptyRoi:
            continue
        return make_prompt(probe, a, d), a, roi
    raise EmptyRoi("no visible anchor yields a nonempty ROI")


def _run_one(args):
    idx, scene_doc, prompt, method, cfg, seed, model_path = args
    from .scene import load_scene

    scene = load_scene(scene_doc)
    model = ScorerModel.load(model_path) if (method.scorer.learned and model_path) else None
    pcfg = PipelineConfig(
        c_max=cfg.c_max, budget=cfg.budget, scorer=method.scorer, strategy=method.strategy,
        planner=cfg.planner, camera=cfg.camera, time=cfg.time, seed=seed,
    )
    try:
        rep = run_pipeline(scene, prompt, pcfg, model)
    except Exception as exc:  # a crashing run is a failed row, never a failed batch
        rep = RunReport(prompt, False, f"error: {type(exc).__name__}: {exc}", 0, 0, 0.0, 0.0, 0.0, 0)
    return idx, method.name, rep


@dataclass
class BenchResult:
    rows: list[dict]
    aggregates: dict[str, dict]
    reports: dict = field(default_factory=dict, repr=False)

    def table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r[k]) for k in ROW_FIELDS})
        return buf.getvalue()

    def summary(self) -> dict:
        return {"version": BENCH_VERSION, "methods": self.aggregates,
                "note": "time_s is a declared synthetic robot-time model, not comparable to real seconds"}


ROW_FIELDS = ["scene", "method", "scene_digest", "prompt", "density", "success", "objects_moved",
              "viewpoints", "time_s", "final_coverage", "reason"]


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6f}"
    return v


def aggregate(rows: list[dict]) -> dict:
    """SR in percent plus mean and std of objects moved, viewpoints and synthetic time."""
    n = len(rows)
    out = {"n": n}
    if n == 0:
        out.update(sr=0.0, objects_mean=0.0, objects_std=0.0, viewpoints_mean=0.0,
                   viewpoints_std=0.0, time_mean=0.0, time_std=0.0)
        return out
    out["sr"] = 100.0 * sum(bool(r["success"]) for r in rows) / n
    for key, col in (("objects", "objects_moved"), ("viewpoints", "viewpoints"), ("time", "time_s")):
        vals = np.array([float(r[col]) for r in rows])
        out[f"{key}_mean"] = float(vals.mean())
        out[f"{key}_std"] = float(vals.std())
    return out


def run_benchmark(scenes: list[Scene], methods, cfg: BenchConfig | None = None, seed: int = 0,
                  model_path=None, keep_reports: bool = False) -> BenchResult:
    """Every method on every scene with shared prompts and seeds; failures become unsuccessful rows."""
    cfg = cfg or BenchConfig()
    if not scenes or not methods:
        raise ValueError("need at least one scene and one method")
    tasks, meta = [], {}
    for i, scene in enumerate(scenes):
        task_seed = int(np.random.default_rng([seed, i]).integers(2**31 - 1))
        doc = save_scene(scene)
        try:
            prompt, _, roi = make_task(scene, task_seed, cfg.camera)
            density = region_density(scene, roi)
        except EmptyRoi:
            prompt, density = "Show me to the left of nothing", 0.0
        meta[i] = (prompt, density, scene_digest(scene))
        for m in methods:
            tasks.append((i, doc, prompt, m, cfg, task_seed, model_path))

    workers = cfg.workers or int(os.environ.get("ARS_THREADS", "1"))
    workers = max(1, min(workers, os.cpu_count() or 1))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_one, tasks, chunksize=1))
    else:
        results = [_run_one(t) for t in tasks]

    order = {m.name: k for k, m in enumerate(methods)}
    results.sort(key=lambda r: (r[0], order[r[1]]))
    rows, reports = [], {}
    for i, name, rep in results:
        prompt, density, digest = meta[i]
        rows.append({
            "scene": i, "method": name, "scene_digest": digest, "prompt": prompt,
            "density": density, "success": bool(rep.success), "objects_moved": rep.objects_moved,
            "viewpoints": rep.unique_viewpoints, "time_s": rep.synthetic_time_s,
            "final_coverage": rep.final_coverage, "reason": rep.reason,
        })
        if keep_reports:
            reports[(i, name)] = rep
    aggs = {m.name: aggregate([r for r in rows if r["method"] == m.name]) for m in methods}
    return BenchResult(rows, aggs, reports)


def quantile_edges(densities, k: int = 3) -> list[float]:
    """Equal-count bin edges (terciles for ``k = 3``)."""
    d = np.asarray(densities, dtype=float)
    if len(d) == 0:
        return [0.0] * (k + 1)
    return [float(x) for x in np.quantile(d, np.linspace(0.0, 1.0, k + 1))]


def stratify(rows: list[dict], edges) -> list[dict]:
    """Per (bin, method) aggregates; bins are ``[e_k, e_k+1)`` with the last one closed."""
    edges = [float(e) for e in edges]
    if any(b < a for a, b in zip(edges, edges[1:])):
        raise ValueError("bin edges must be ordered")
    methods = list(dict.fromkeys(r["method"] for r in rows))
    out = []
    for k in range(len(edges) - 1):
        lo, hi = edges[k], edges[k + 1]
        last = k == len(edges) - 2
        in_bin = [r for r in rows if lo <= r["density"] < hi or (last and r["density"] == hi)]
        for m in methods:
            agg = aggregate([r for r in in_bin if r["method"] == m])
            out.append({"bin": k, "lo": lo, "hi": hi, "method": m, **agg})
    return out


def strata_csv(strata: list[dict]) -> str:
    if not strata:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(strata[0]), lineterminator="\n")
    w.writeheader()
    for r in strata:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def write_outputs(result: BenchResult, out_dir, strata_bins: int | None = 3) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "runs.csv"), "w", encoding="utf-8") as fh:
        fh.write(f"# roisense-bench {BENCH_VERSION}\n")
        fh.write(result.table_csv())
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(result.summary(), fh, indent=1, sort_keys=True)
    if strata_bins:
        edges = quantile_edges([r["density"] for r in result.rows], strata_bins)
        with open(os.path.join(out_dir, "strata.csv"), "w", encoding="utf-8") as fh:
            fh.write(strata_csv(stratify(result.rows, edges)))


def with_methods(names, oracle: bool = False) -> list[MethodSpec]:
    table = method_table(oracle)
    unknown = [n for n in names if n not in table]
    if unknown:
        raise ValueError(f"unknown method(s): {', '.join(unknown)}")
    return [table[n] for n in names]


__all__ = [
    "MethodSpec", "BenchConfig", "BenchResult", "method_table", "run_benchmark", "region_density",
    "stratify", "aggregate", "quantile_edges", "write_outputs", "with_methods",
]
