"""Geometric feature engineering for time-series classification.

Three pipelines feed a small 1D CNN: the (downsampled) raw series, persistent
Betti numbers of its sliding-window embedding, and bucketed normalised
Laplacian spectra of the embedding's epsilon-graphs.
"""
from .downsample import (
    Bucketing, bucket_average, downsample, dropout, dynamic_buckets, lttb, lttb_indices,
    naive_buckets, ols_sse, triangle_area,
)
from .embedding import takens_embed
from .homology import (
    Barcode, EpsilonSeries, Filtration, betti_features, betti_naive, betti_series, reduce,
    rips_filtration,
)
from .ingestion import LabeledChunk, TimeSeries, load_bonn_dir, segment, zscore
from .neighbor_graph import EpsilonGrid, epsilon_graph, epsilon_grid, pairwise_distances
from .spectra import count_in, mu_series, normalized_laplacian, sym_eigenvalues

__version__ = "0.1.0"
