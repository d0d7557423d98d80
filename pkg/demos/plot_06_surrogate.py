"""
Training the coverage surrogate
===============================

Samples come from random rollouts; each holds pooled belief and ROI grids, the
viewpoint and the coverage actually reached.  A small dense network learns to
predict that coverage without simulating the observation.  This demo uses a
few hundred samples; the acceptance suite trains on 10,000.
"""
import numpy as np
from scipy.stats import spearmanr

from roisense.scorer import TrainHyper, generate_dataset, train_surrogate
from roisense.scorer.dataset import TEST

data = generate_dataset(400, seed=0)
print("samples", len(data), "feature length", data.features.shape[1])
print("targets: mean %.3f, min %.3f, max %.3f" % (data.targets.mean(), data.targets.min(), data.targets.max()))

model, report = train_surrogate(data, TrainHyper(epochs=40))
print("epochs %d (best %d), train MSE %.4f, val MSE %.4f, test MSE %.4f"
      % (report.epochs, report.best_epoch, report.train_mse, report.val_mse, report.test_mse))

# %%
x, y = data.part(TEST)
pred = model.forward(x.astype(float))
print("test Spearman %.3f" % spearmanr(pred, y).statistic)
