"""Normalised Laplacian spectra of epsilon-graphs, bucketed into epsilon-series."""
from __future__ import annotations

import numpy as np

from .exceptions import EigensolverError
from .homology import EpsilonSeries
from .neighbor_graph import EpsilonGrid, epsilon_graph

DEFAULT_TAU_COUNT = 7
ZERO_TOL = 1e-7
SNAP_TOL = 1e-9  # eigenvalues this close to a cut point are counted as lying on it


def normalized_laplacian(adj):
    """``I - D^-1/2 A D^-1/2``, with a zero diagonal entry for isolated vertices."""
    a = np.asarray(adj, dtype=np.float64)
    if a.shape[0] and np.any(np.diag(a)):
        raise ValueError("graph must not contain self-loops")
    deg = a.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    lap = -(inv_sqrt[:, None] * a * inv_sqrt[None, :])
    lap[np.diag_indices_from(lap)] = nz.astype(np.float64)
    # mirror the upper triangle so symmetry is exact
    upper = np.triu(lap, 1)
    return upper + upper.T + np.diag(np.diag(lap))


def jacobi_eigenvalues(m, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi rotations for a dense symmetric matrix; ascending eigenvalues."""
    a = np.array(m, dtype=np.float64, copy=True)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    scale = max(np.abs(a).max(), 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    raise EigensolverError(f"Jacobi iteration did not converge for a matrix of order {n}")


def sym_eigenvalues(m, tol=None, method="lapack"):
    """All eigenvalues of a symmetric matrix in ascending order."""
    a = np.asarray(m, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    if method == "jacobi":
        return jacobi_eigenvalues(a, tol=1e-14 if tol is None else tol / max(n, 1))
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    try:
        return np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed for a matrix of order {n}: {exc}") from exc


def count_in(values, lo, hi, closed_hi=False):
    v = np.asarray(values)
    upper = v <= hi if closed_hi else v < hi
    return int(np.count_nonzero((v >= lo) & upper))


def tau_partition(count=DEFAULT_TAU_COUNT):
    """Evenly spaced cut points 0 = tau_0 < ... < tau_count = 2."""
    if count < 1:
        raise ValueError("need at least one bucket")
    return 2.0 * np.arange(count + 1) / count


def check_taus(taus):
    t = np.asarray(taus, dtype=np.float64)
    if t.size < 2 or t[0] != 0.0 or t[-1] != 2.0 or np.any(np.diff(t) <= 0):
        raise ValueError("taus must increase strictly from 0 to 2")
    return t


def bucket_counts(eigenvalues, taus):
    """Eigenvalue counts per [tau_j, tau_j+1); the last bucket is closed at 2."""
    # roundoff can push eigenvalues of exactly 0 or 2 just outside [0, 2]
    lam = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, 2.0)
    # values such as 1 + 1/deg sit exactly on common cut points; without
    # snapping, solver roundoff decides the bucket
    taus = np.asarray(taus, dtype=np.float64)
    near = np.abs(lam[:, None] - taus[None, :])
    hit = near.min(axis=1) <= SNAP_TOL if lam.size else np.zeros(0, dtype=bool)
    lam = np.where(hit, taus[near.argmin(axis=1)] if lam.size else lam, lam)
    counts = np.empty(len(taus) - 1, dtype=np.int64)
    last = len(taus) - 2
    for j in range(len(taus) - 1):
        counts[j] = count_in(lam, taus[j], taus[j + 1], closed_hi=(j == last))
    return counts


def mu_series(dm, grid, taus=None, method="lapack"):
    """Bucketed normalised-Laplacian eigenvalue counts on every grid value.

    Graphs only change when eps passes a pairwise distance, so the spectrum
    is reused while the edge count stays the same (the graphs are nested).
    """
    dm = np.asarray(dm, dtype=np.float64)
    taus = check_taus(tau_partition() if taus is None else taus)
    eps = np.asarray(getattr(grid, "values", grid), dtype=np.float64)
    dists = np.sort(dm[np.triu_indices(dm.shape[0], 1)])
    edge_counts = np.searchsorted(dists, eps, side="left")
    channels = np.zeros((len(taus) - 1, eps.size))
    last_count, last = None, None
    for g, e in enumerate(eps):
        if edge_counts[g] != last_count:
            lap = normalized_laplacian(epsilon_graph(dm, e))
            try:
                lam = sym_eigenvalues(lap, method=method)
            except EigensolverError as exc:
                raise EigensolverError(f"at eps={e!r}: {exc}") from exc
            last = bucket_counts(lam, taus)
            last_count = edge_counts[g]
        channels[:, g] = last
    if not isinstance(grid, EpsilonGrid):
        grid = EpsilonGrid(values=eps, r_max=float(eps[-1]) if eps.size else 0.0)
    return EpsilonSeries(channels=channels, grid=grid, kind="spectra")


def zero_multiplicity(eigenvalues, tol=ZERO_TOL):
    return int(np.count_nonzero(np.abs(np.asarray(eigenvalues)) <= tol))
