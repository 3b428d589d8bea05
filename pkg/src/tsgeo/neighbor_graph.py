"""Pairwise distances, epsilon-neighbour graphs and the shared epsilon grid."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateCloudError

DEFAULT_STEPS = 300
R_POLICIES = ("max_distance", "enclosing_radius")


@dataclass(frozen=True)
class EpsilonGrid:
    values: np.ndarray
    r_max: float

    def __len__(self):
        return len(self.values)


def pairwise_distances(cloud):
    """Euclidean distance matrix, exactly symmetric with a zero diagonal."""
    x = np.asarray(cloud, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("point cloud is empty")
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    d = np.triu(d, 1)
    return d + d.T


def epsilon_graph(dm, eps):
    """Boolean adjacency of the graph joining points at distance strictly below `eps`."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    adj = np.asarray(dm) < eps
    np.fill_diagonal(adj, False)
    return adj


def epsilon_grid(dm, steps=DEFAULT_STEPS, r_policy="max_distance"):
    dm = np.asarray(dm)
    if dm.shape[0] < 2:
        raise DegenerateCloudError("need at least 2 points to build an epsilon grid")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if r_policy == "max_distance":
        r_max = float(dm.max())
    elif r_policy == "enclosing_radius":
        r_max = float(dm.max(axis=1).min())
    else:
        raise ValueError(f"unknown r_policy {r_policy!r}; expected one of {R_POLICIES}")
    if not r_max > 0:
        raise DegenerateCloudError("all points coincide; the epsilon range is empty")
    values = r_max * np.arange(1, steps + 1) / steps
    values[-1] = r_max
    return EpsilonGrid(values=values, r_max=r_max)


def connected_components(adj):
    """Component count of an undirected graph by breadth-first search."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(adj[u] & ~seen):
                seen[v] = True
                queue.append(v)
    return count
