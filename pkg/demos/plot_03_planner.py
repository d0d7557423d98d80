"""
Choosing the next viewpoint
===========================

The planner scores uniform samples, seeds a Gaussian mixture at the best ones
and refines it on elite samples.  With the oracle scorer every score is the
exact coverage the view would reach.
"""
from roisense.bench import make_task
from roisense.planner import PlannerConfig, gmm_mpc
from roisense.scene import generate_scene
from roisense.scorer import Scorer
from roisense.sensing import CameraConfig, coverage, home_viewpoint, observe

camera = CameraConfig(width=80, height=60)
scene = generate_scene(seed=11)
prompt, anchor, roi = make_task(scene, seed=0, camera=camera)
observe(scene, home_viewpoint(scene.spec), camera, roi)
print(prompt, "| coverage after the home view: %.3f" % coverage(scene.belief, roi))

scorer = Scorer("oracle-roi", camera=camera)
result = gmm_mpc(scene, roi, scorer, PlannerConfig(seed=1))
print("best uniform sample %.3f, planner result %.3f after %d evaluations"
      % (result.best_uniform_score, result.score, result.evaluations))
v = result.viewpoint
print("viewpoint position", [round(x, 3) for x in v.position], "yaw %.2f pitch %.2f" % (v.yaw, v.pitch))

# %%
# Elite scores per iteration show the mixture concentrating.
for rec in result.trace:
    s = rec["elite_scores"]
    print("iteration", rec["iteration"], "elite range %.3f .. %.3f" % (min(s), max(s)))
