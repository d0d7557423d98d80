"""Language-guided active sensing in confined voxel scenes.

The package simulates a depth camera looking into a cluttered shelf, turns a
short prompt such as "show me behind the pink cylinder" into a region of
interest, plans viewpoints that uncover it and relocates the objects that
block the view.
"""
from .errors import RoiSenseError
from .scene import Belief, GenParams, GridSpec, Scene, SceneObject, generate_scene, load_scene, save_scene
from .sensing import CameraConfig, RoiBox, Viewpoint, coverage, observe
from .language import Direction, parse_prompt
from .planner import PlannerConfig, gmm_mpc
from .pipeline import PipelineConfig, RunReport, Strategy, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "RoiSenseError", "Belief", "GenParams", "GridSpec", "Scene", "SceneObject", "generate_scene",
    "load_scene", "save_scene", "CameraConfig", "RoiBox", "Viewpoint", "coverage", "observe",
    "Direction", "parse_prompt", "PlannerConfig", "gmm_mpc", "PipelineConfig", "RunReport",
    "Strategy", "run_pipeline",
]
