"""
Which object blocks the view?
=============================

For every visible surface voxel of an object, the ray from the camera through
it is clipped against the ROI box; the distance from the voxel to the far
intersection counts toward the object's blocking score when the voxel lies in
front of that far face.
"""
import numpy as np

from roisense.blocking import rank_blockers, ray_roi_segment
from roisense.bench import make_task
from roisense.scene import generate_scene
from roisense.sensing import CameraConfig, home_viewpoint, observe

p1, p2 = ray_roi_segment((0, 0, 0), (0, 1, 0), (np.array([-1, 2, -1]), np.array([1, 3, 1])))
print("segment through a slab:", p1, p2)

# %%
camera = CameraConfig(width=80, height=60)
scene = generate_scene(seed=21)
prompt, anchor, roi = make_task(scene, seed=2, camera=camera)
obs = observe(scene, home_viewpoint(scene.spec), camera, roi)
print(prompt)
for e in rank_blockers(scene, roi, obs, exclude=(anchor,))[:5]:
    o = scene.objects[e.object_id]
    print(f"  object {e.object_id:2d} ({o.color_label} {o.shape_label}, {o.category}) h = {e.score:.2f} m")
