"""
A small design matrix
=====================

The harness crosses chunk length, resolution, downsampling method and
feature pipeline, and scores every combination with stratified k-fold
cross-validation. Here is a reduced grid on the synthetic corpus.
"""
import os
import tempfile

from tsgeo.config import parse_config
from tsgeo.harness import design_cells, run_matrix

cfg = parse_config("""
corpus = synthetic
synthetic_per_class = 30
chunk_lengths = 150
min_resolution = 100
methods = dropout, lttb
dynamic = false
features = raw, spectra
folds = 5
epsilon_steps = 300
""")
print(len(design_cells(cfg)), "cells")

out = os.path.join(tempfile.mkdtemp(), "results.csv")
for row in run_matrix(cfg, out):
    print(f"{row['feature']:8s} {row['method']:8s} res={row['resolution']:>4s} "
          f"acc={float(row['mean_acc']):.3f} +- {float(row['std_acc']):.3f}")
