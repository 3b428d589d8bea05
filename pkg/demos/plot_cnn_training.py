"""
Training the small 1D CNN
=========================

The network has two convolution and pooling blocks and a sigmoid output.
Its gradients are checked against finite differences before it is trained.
"""
import numpy as np

from tsgeo import cnn
from tsgeo.harness import prepare_inputs, ExperimentCell
from tsgeo.config import Config
from tsgeo.synthetic import sine_vs_noise

err, per_group = cnn.tiny_gradcheck(seed=0)
print(f"finite-difference check: max relative error {err:.2e}")

###############################################################################
# Raw z-scored chunks, downsampled from 300 to 200 samples with LTTB.
corpus = sine_vs_noise(300, 60, seed=3)
labels = np.array([c.label for c in corpus])
cell = ExperimentCell("raw", 300, "lttb", False, 200)
x = prepare_inputs(cell, [c.series.values for c in corpus], Config())

spec = cnn.raw_spec(200)
print("architecture", spec, "layer lengths", spec.layer_lengths())

rng = np.random.default_rng(0)
order = rng.permutation(len(labels))
train, test = order[:90], order[90:]
model = cnn.train(cnn.build(spec, seed=0), x[train], labels[train], epochs=10)
print("epoch losses:", np.round(model.loss_trace, 3))
print("held-out accuracy:", cnn.evaluate(model, x[test], labels[test]))
