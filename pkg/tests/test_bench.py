import csv
import io
import json

import numpy as np
import pytest

from roisense.bench import (
    BenchConfig, aggregate, make_task, method_table, quantile_edges, region_density, run_benchmark, stratify,
    with_methods, write_outputs,
)
from roisense.errors import EmptyRoi
from roisense.pipeline import Strategy
from roisense.planner import PlannerConfig
from roisense.scene import GridSpec, Scene, generate_scene
from roisense.scorer import ScorerKind
from roisense.sensing import CameraConfig, RoiBox

from conftest import aligned_box

FAST = BenchConfig(camera=CameraConfig(width=40, height=30),
                   planner=PlannerConfig(n_uniform=48, batch=24, n_elite=6, iterations=2))


def test_method_table():
    t = method_table()
    assert t["ours"].scorer is ScorerKind.LEARNED_ROI and t["ours"].strategy is Strategy.VB
    assert t["s-nb"].scorer is ScorerKind.LEARNED_SCENE and t["s-nb"].strategy is Strategy.NB
    o = method_table(oracle=True)
    assert o["rs-rb"].scorer is ScorerKind.ORACLE_ROI and o["s-vb"].scorer is ScorerKind.ORACLE_SCENE
    with pytest.raises(ValueError):
        with_methods(["ours", "magic"])


def test_region_density_examples():
    spec = GridSpec((50, 50, 50), 0.02)  # 1 m^3
    s = Scene(spec, [aligned_box(spec, i, (10 * i, 0, 0), (10 * i + 3, 3, 3)) for i in range(4)])
    half = RoiBox(0, 24, 0, 49, 0, 49)  # 0.5 m^3 with objects 0, 1 and 2 inside
    assert region_density(s, half) == pytest.approx(6.0)
    assert region_density(s, RoiBox(0, 49, 10, 49, 0, 49)) == 0.0


def test_region_density_brute_force():
    for seed in range(5):
        s = generate_scene(seed=seed)
        nx = s.spec.dims[0]
        roi = RoiBox(nx // 3, nx - 1, 0, s.spec.dims[1] - 1, 0, s.spec.dims[2] - 1)
        n = 0
        for o in s.objects.values():
            if any(roi.x0 <= v[0] <= roi.x1 and roi.y0 <= v[1] <= roi.y1 and roi.z0 <= v[2] <= roi.z1
                   for v in o.voxels.tolist()):
                n += 1
        vol = (roi.x1 - roi.x0 + 1) * (roi.y1 - roi.y0 + 1) * (roi.z1 - roi.z0 + 1) * s.spec.resolution ** 3
        assert region_density(s, roi) == pytest.approx(n / vol)


def open_scene():
    spec = GridSpec((40, 25, 12), 0.02, (-0.4, 0.4, 0.5))
    return Scene(spec, [aligned_box(spec, 0, (2, 3, 0), (6, 7, 5), color="pink")])


def test_trivially_open_scene_all_methods_succeed():
    res = run_benchmark([open_scene()], with_methods(method_table().keys(), oracle=True), FAST, seed=1)
    assert len(res.rows) == 5
    assert all(a["sr"] == 100.0 for a in res.aggregates.values())


@pytest.fixture(scope="module")
def small_bench():
    scenes = [generate_scene(seed=300 + i) for i in range(4)]
    return scenes, run_benchmark(scenes, with_methods(["ours", "rs-nb", "s-vb"], oracle=True), FAST, seed=7,
                                 keep_reports=True)


def test_rows_and_reaggregation(small_bench):
    scenes, res = small_bench
    assert len(res.rows) == 12
    for m, agg in res.aggregates.items():
        rows = [r for r in res.rows if r["method"] == m]
        assert agg["n"] == 4
        assert agg["sr"] == pytest.approx(100 * np.mean([r["success"] for r in rows]))
        assert agg["objects_mean"] == pytest.approx(np.mean([r["objects_moved"] for r in rows]))
        assert agg["viewpoints_std"] == pytest.approx(np.std([r["viewpoints"] for r in rows]))
        assert agg["time_mean"] == pytest.approx(np.mean([r["time_s"] for r in rows]))


def test_rows_share_scene_and_prompt(small_bench):
    _, res = small_bench
    for i in range(4):
        rows = [r for r in res.rows if r["scene"] == i]
        assert len({(r["scene_digest"], r["prompt"], r["density"]) for r in rows}) == 1


def test_success_flag_matches_trace(small_bench):
    _, res = small_bench
    for (i, m), rep in res.reports.items():
        last_cov = [s.coverage for s in rep.trace][-1]
        assert rep.success == (last_cov >= 0.8 and rep.unique_viewpoints <= 8)


def test_determinism(small_bench, tmp_path):
    scenes, res = small_bench
    again = run_benchmark(scenes, with_methods(["ours", "rs-nb", "s-vb"], oracle=True), FAST, seed=7)
    assert again.table_csv() == res.table_csv()
    write_outputs(res, tmp_path / "a")
    write_outputs(again, tmp_path / "b")
    for name in ("runs.csv", "summary.json", "strata.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    text = (tmp_path / "a" / "runs.csv").read_text()
    assert text.startswith("# roisense-bench v1\n")
    rows = list(csv.DictReader(io.StringIO(text.split("\n", 1)[1])))
    assert len(rows) == 12
    assert json.loads((tmp_path / "a" / "summary.json").read_text())["version"] == "v1"


def test_failing_runs_become_rows():
    s = open_scene()
    # the anchor-free scene gets the fallback prompt and every run fails without aborting
    s2 = Scene(GridSpec((20, 20, 10), 0.02, (-0.2, 0.4, 0.5)))
    res = run_benchmark([s, s2], with_methods(["ours"], oracle=True), FAST)
    assert [r["success"] for r in res.rows] == [True, False]


def test_stratify():
    rows = [{"method": m, "density": d, "success": d < 5, "objects_moved": int(d), "viewpoints": 1 + int(d) % 3,
             "time_s": 5.0 * d} for d in range(10) for m in ("a", "b")]
    one = stratify(rows, [0, 9])
    assert one[0]["n"] == 10 and one[0]["sr"] == aggregate([r for r in rows if r["method"] == "a"])["sr"]
    edges = quantile_edges([r["density"] for r in rows], 3)
    parts = stratify(rows, edges)
    assert sum(p["n"] for p in parts) == len(rows)
    for p in parts:
        sel = [r for r in rows if r["method"] == p["method"] and
               (p["lo"] <= r["density"] < p["hi"] or (p["bin"] == 2 and r["density"] == p["hi"]))]
        assert p["viewpoints_mean"] == pytest.approx(np.mean([r["viewpoints"] for r in sel]))
    empty = stratify(rows, [100, 200])
    assert all(p["n"] == 0 for p in empty)
    with pytest.raises(ValueError):
        stratify(rows, [3, 1])


def test_make_task_is_groundable():
    s = generate_scene(seed=8)
    prompt, anchor, roi = make_task(s, 0, CameraConfig(width=40, height=30))
    assert prompt.startswith("Show me") and roi.size > 0
    with pytest.raises(EmptyRoi):
        make_task(Scene(GridSpec((20, 20, 10), 0.02, (-0.2, 0.4, 0.5))), 0)
