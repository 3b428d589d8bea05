"""
Laplacian eigenvalue histograms along epsilon
=============================================

For each epsilon the normalized Laplacian of the neighbor graph has all its
eigenvalues in [0, 2]. Counting them in seven equal buckets gives seven
curves that always add up to the number of points.
"""
import numpy as np

from tsgeo import epsilon_grid, mu_series, pairwise_distances, takens_embed
from tsgeo.spectra import normalized_laplacian, sym_eigenvalues

###############################################################################
# Complete graphs have eigenvalue 0 once and n/(n-1) everywhere else.
for n in (3, 5, 8):
    lam = sym_eigenvalues(normalized_laplacian(~np.eye(n, dtype=bool)))
    print(n, np.round(lam, 4))

###############################################################################
# The mu series of an embedded sine wave.
y = np.sin(np.arange(120) / 4.0)
dm = pairwise_distances(takens_embed(y))
grid = epsilon_grid(dm, 300)
mu = mu_series(dm, grid).channels
print("channel sums:", set(mu.sum(axis=0).astype(int).tolist()))
for g in (0, 30, 100, 299):
    print(f"eps={grid.values[g]:.3f}", mu[:, g].astype(int).tolist())
