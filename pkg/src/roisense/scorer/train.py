"""Mini-batch gradient descent with momentum on the surrogate's squared error."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from ..errors import Divergence
from .dataset import TEST, TRAIN, VAL, Dataset
from .model import DEFAULT_SIZES, ScorerModel

log = logging.getLogger(__name__)


@dataclass
class TrainHyper:
    lr: float = 1e-3
    momentum: float = 0.9
    batch: int = 64
    epochs: int = 200
    patience: int = 10
    seed: int = 0
    sizes: tuple[int, ...] = DEFAULT_SIZES


@dataclass
class TrainReport:
    train_mse: float
    val_mse: float
    test_mse: float
    spearman: float
    epochs: int
    best_epoch: int
    history: list[tuple[float, float]] = field(default_factory=list)  # (train, val) per epoch

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def mse(model: ScorerModel, x, y, chunk: int = 4096) -> float:
    if len(y) == 0:
        return float("nan")
    preds = np.concatenate([model.forward(x[i:i + chunk]) for i in range(0, len(y), chunk)])
    return float(np.mean((preds - y) ** 2))


def train_surrogate(data: Dataset, hyper: TrainHyper | None = None, model: ScorerModel | None = None):
    """Fit a surrogate; early-stops on validation error and returns the best weights seen."""
    hp = hyper or TrainHyper()
    xt, yt = data.part(TRAIN)
    xv, yv = data.part(VAL)
    xs, ys = data.part(TEST)
    if len(yt) == 0:
        raise ValueError("empty training split")
    sizes = (xt.shape[1],) + tuple(hp.sizes[1:])
    model = model or ScorerModel.init(sizes, hp.seed)
    rng = np.random.default_rng(hp.seed)
    velocity = [np.zeros_like(p) for p in model.params()]
    best, best_val, best_epoch, stale = model.copy(), np.inf, 0, 0
    history = []
    epoch = 0
    for epoch in range(1, hp.epochs + 1):
        perm = rng.permutation(len(yt))
        for s in range(0, len(perm), hp.batch):
            idx = perm[s:s + hp.batch]
            _, gw, gb = model.loss_and_grads(xt[idx].astype(float), yt[idx])
            for p, g, vel in zip(model.params(), gw + gb, velocity):
                vel *= hp.momentum
                vel -= hp.lr * g
                p += vel
        tr = mse(model, xt, yt)
        if not np.isfinite(tr):
            raise Divergence(f"training MSE became {tr} at epoch {epoch}")
        va = mse(model, xv, yv) if len(yv) else tr
        history.append((tr, va))
        log.info("epoch %d train %.5f val %.5f", epoch, tr, va)
        if va < best_val - 1e-9:
            best, best_val, best_epoch, stale = model.copy(), va, epoch, 0
        else:
            stale += 1
            if stale >= hp.patience:
                break
    test = mse(best, xs, ys)
    rho = float("nan")
    if len(ys) > 2:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # constant predictions leave rho undefined (nan)
            rho = float(spearmanr(best.forward(xs.astype(float)), ys).statistic)
    report = TrainReport(mse(best, xt, yt), best_val, test, rho, epoch, best_epoch, history)
    return best, report
