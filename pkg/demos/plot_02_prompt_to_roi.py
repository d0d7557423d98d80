"""
From a prompt to a region of interest
=====================================

A prompt names an anchor object and a direction.  The anchor is grounded to an
object seen in the first image and the ROI is the slab from the anchor's face
to the edge of the shelf.
"""
from roisense.language import Direction, make_prompt, parse_prompt, roi_from_prompt, visible_anchor_choices
from roisense.scene import generate_scene
from roisense.sensing import home_viewpoint, observe

for text in ["Show me to the left of the pink cylinder",
             "Show me behind the purple cylinder",
             "What is in front of the red box?"]:
    p = parse_prompt(text)
    print(f"{text!r:50} -> {p.direction.value:6s} {' '.join(p.anchor_tokens)}")

# %%
# Ground a prompt in a generated scene.
scene = generate_scene(seed=3)
observe(scene, home_viewpoint(scene.spec))
anchor = visible_anchor_choices(scene)[0]
prompt = make_prompt(scene, anchor, Direction.BEHIND)
parse, oid, roi = roi_from_prompt(scene, prompt)
print(prompt, "-> object", oid, "ROI voxel bounds", roi.bounds(), "size", roi.size)

# %%
# Vertical relations are outside the supported set and are rejected.
try:
    parse_prompt("Show me above the box")
except Exception as exc:
    print(type(exc).__name__, exc)
