"""Coverage scorers: the simulated-observation oracle and the learned surrogate."""
from __future__ import annotations

from enum import Enum

import numpy as np

from ..scene import Scene
from ..sensing import CameraConfig, RoiBox
from .features import FEATURE_LEN, batch_features, extract_features
from .model import ScorerModel, surrogate_forward
from .oracle import oracle_score, oracle_scores


class ScorerKind(str, Enum):
    ORACLE_ROI = "oracle-roi"
    ORACLE_SCENE = "oracle-scene"
    LEARNED_ROI = "learned-roi"
    LEARNED_SCENE = "learned-scene"

    @property
    def learned(self) -> bool:
        return self in (ScorerKind.LEARNED_ROI, ScorerKind.LEARNED_SCENE)

    @property
    def whole_scene(self) -> bool:
        return self in (ScorerKind.ORACLE_SCENE, ScorerKind.LEARNED_SCENE)


class Scorer:
    """Callable ``scorer(scene, roi, viewpoints) -> scores`` for the planner.

    Scene variants ignore the requested ROI and score the whole grid.
    """

    def __init__(self, kind: ScorerKind | str, model: ScorerModel | None = None,
                 camera: CameraConfig | None = None):
        self.kind = ScorerKind(kind)
        if self.kind.learned and model is None:
            raise ValueError(f"{self.kind.value} scorer needs a trained model")
        self.model = model
        self.camera = camera or CameraConfig()
        self.evaluations = 0

    def target(self, scene: Scene, roi: RoiBox) -> RoiBox:
        return RoiBox.whole(scene.spec) if self.kind.whole_scene else roi

    def __call__(self, scene: Scene, roi: RoiBox, views) -> np.ndarray:
        roi = self.target(scene, roi)
        self.evaluations += len(views)
        if not views:
            return np.zeros(0)
        if self.kind.learned:
            return np.atleast_1d(self.model.forward(batch_features(scene.belief, roi, views, scene.spec)))
        return oracle_scores(scene, roi, views, self.camera)


__all__ = [
    "ScorerKind", "Scorer", "ScorerModel", "oracle_score", "oracle_scores",
    "extract_features", "batch_features", "surrogate_forward", "FEATURE_LEN",
]

from .dataset import Dataset, generate_dataset  # noqa: E402
from .train import TrainHyper, TrainReport, train_surrogate  # noqa: E402

__all__ += ["Dataset", "generate_dataset", "TrainHyper", "TrainReport", "train_surrogate"]
