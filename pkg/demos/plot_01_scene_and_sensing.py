"""
Scenes, depth images and coverage
=================================

A generated shelf scene is a voxel grid holding two layers: the ground truth
(which object occupies each voxel) and the belief (what the camera has seen).
Observing from a viewpoint casts one ray per pixel and carves the belief.
"""
import numpy as np

from roisense.scene import Belief, generate_scene
from roisense.sensing import CameraConfig, RoiBox, coverage, home_viewpoint, observe

scene = generate_scene(seed=7)
print("grid dims", scene.spec.dims, "extent (m)", np.round(scene.spec.extent, 2))
print("objects:", len(scene.objects))
for o in list(scene.objects.values())[:5]:
    print(f"  {o.id:2d} {o.category:5s} {o.color_label:7s} {o.shape_label:8s} voxels={len(o.voxels)}")

# %%
# Observe from the home viewpoint, which faces the scene center from the robot base.
camera = CameraConfig()
obs = observe(scene, home_viewpoint(scene.spec), camera)
print("new voxels observed:", obs.new_voxels)
print("whole-grid coverage: %.3f" % obs.coverage)

# %%
# The depth image is a plain array; misses are ``inf``.
finite = obs.depth[np.isfinite(obs.depth)]
print("depth image", obs.depth.shape, "hits", finite.size, "nearest %.3f m" % finite.min())

# %%
# Coverage of any box of voxels is the fraction that is no longer UNKNOWN.
nx, ny, nz = scene.spec.dims
back_half = RoiBox(0, nx - 1, ny // 2, ny - 1, 0, nz - 1)
print("coverage of the rear half: %.3f" % coverage(scene.belief, back_half))

# A top-down view of the belief, summarised per column (x, y):
seen = (scene.belief != Belief.UNKNOWN).mean(axis=2)
rows = ["".join(" .:-=+*#%@"[int(v * 9)] for v in seen[:, j]) for j in range(0, ny, 2)]
print("\n".join(rows))
