"""
Running the whole loop
======================

Plan a view, observe, move blocking objects away until the ROI is covered or
nothing is left to move, put the objects back and repeat.  The three object
selection strategies share everything else.
"""
from roisense.bench import bench_camera, bench_planner, make_task
from roisense.pipeline import PipelineConfig, run_pipeline
from roisense.scene import generate_scene

base = generate_scene(seed=1004)
prompt, _, _ = make_task(base, seed=0, camera=bench_camera())
print(prompt)
for strategy in ("vb", "rb", "nb"):
    cfg = PipelineConfig(strategy=strategy, camera=bench_camera(), planner=bench_planner(), seed=0)
    rep = run_pipeline(base.copy(), prompt, cfg)
    print(f"{strategy}: success={rep.success} viewpoints={rep.unique_viewpoints} moved={rep.objects_moved} "
          f"coverage={rep.final_coverage:.3f} time={rep.synthetic_time_s:.0f} s (synthetic)")

# %%
# The trace lists every step with the ROI coverage after it.
for step in rep.trace:
    extra = step.object_id if step.kind == "REMOVE" else (step.restored or "")
    print(f"  {step.kind:8s} {step.coverage:.3f} {extra}")
