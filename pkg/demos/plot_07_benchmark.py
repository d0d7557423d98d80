"""
Comparing methods
=================

Every method runs on the same scenes with the same prompts and seeds.  Here
all scorers are oracles, which isolates planning and object selection from
surrogate accuracy.
"""
from roisense.bench import quantile_edges, run_benchmark, stratify, with_methods
from roisense.scene import generate_scene

scenes = [generate_scene(seed=10_000 + i) for i in range(6)]
methods = with_methods(["ours", "rs-rb", "rs-nb", "s-vb", "s-nb"], oracle=True)
result = run_benchmark(scenes, methods, seed=0)
for name, a in result.aggregates.items():
    print(f"{name:6s} SR {a['sr']:5.1f}%  objects {a['objects_mean']:.2f}  viewpoints {a['viewpoints_mean']:.2f}"
          f"  time {a['time_mean']:.0f} s (synthetic)")

# %%
# Stratify by region density (objects per cubic meter of ROI).
edges = quantile_edges([r["density"] for r in result.rows], 2)
for row in stratify(result.rows, edges):
    if row["method"] == "ours":
        print(f"density [{row['lo']:.0f}, {row['hi']:.0f}]: n={row['n']} SR {row['sr']:.0f}%")
