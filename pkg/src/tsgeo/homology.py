"""Vietoris-Rips persistence up to tetrahedra and the Betti-number epsilon-series.

A simplex is present at scale ``eps`` when all its pairwise distances are
strictly below ``eps``, so it is born at its diameter and ``beta_k(eps)``
counts the intervals with ``birth < eps <= death``.

Pairing is computed once per cloud over GF(2): dimension 0 by union-find,
dimensions 1 and 2 by reducing the coboundary matrix (persistent cohomology
with clearing), which yields the same intervals as the homology column
reduction but skips the columns of the tetrahedra, by far the largest
group. Coboundaries are generated on the fly from the distance matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numba
import numpy as np

from .exceptions import ComplexityCapError, OracleScaleError
from .neighbor_graph import EpsilonGrid

DEFAULT_SIMPLEX_CAP = 50_000_000
ORACLE_MAX_POINTS = 12
DENSE_LOOKUP_LIMIT = 20_000_000  # entries of a dense key->rank table
BETTI_DIMS = (0, 1, 2)


@dataclass(frozen=True)
class FilteredSimplex:
    vertices: tuple
    diameter: float

    @property
    def dim(self):
        return len(self.vertices) - 1


@dataclass
class Filtration:
    """Rips filtration stored per dimension, each block sorted by (diameter, lex)."""

    dm: np.ndarray
    r_max: float
    max_dim: int
    vertices: list   # vertices[k]: (N_k, k+1) int array in filtration order
    diameters: list  # diameters[k]: (N_k,) float array
    _binom: np.ndarray
    _lookup: list    # per dimension: (sorted colex keys, ranks) or (empty, dense rank table)

    @property
    def n_points(self):
        return self.dm.shape[0]

    def counts(self):
        return [len(d) for d in self.diameters]

    def __len__(self):
        return sum(self.counts())

    @property
    def simplices(self):
        """Every simplex as a FilteredSimplex in the global (diameter, dim, lex) order."""
        out = []
        for k in range(self.max_dim + 1):
            for verts, diam in zip(self.vertices[k], self.diameters[k]):
                out.append(FilteredSimplex(tuple(int(v) for v in verts), float(diam)))
        out.sort(key=lambda s: (s.diameter, s.dim, s.vertices))
        return out


@dataclass(frozen=True)
class Barcode:
    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray  # np.inf for essential classes

    def __len__(self):
        return len(self.dims)

    def intervals(self, dim=None):
        keep = slice(None) if dim is None else self.dims == dim
        return list(zip(self.dims[keep].tolist(), self.births[keep].tolist(), self.deaths[keep].tolist()))

    def finite(self, dim):
        keep = (self.dims == dim) & np.isfinite(self.deaths)
        return np.column_stack([self.births[keep], self.deaths[keep]])


@dataclass(frozen=True)
class EpsilonSeries:
    channels: np.ndarray  # (n_channels, grid length)
    grid: EpsilonGrid
    kind: str

    @property
    def n_channels(self):
        return self.channels.shape[0]


# ---------------------------------------------------------------------------
# complex enumeration

@numba.njit(cache=True)
def _count_simplices(D, r, max_dim):
    n = D.shape[0]
    ne = 0
    nt = 0
    nq = 0
    for i in range(n):
        for j in range(i + 1, n):
            if not D[i, j] < r:
                continue
            ne += 1
            if max_dim < 2:
                continue
            for k in range(j + 1, n):
                if not (D[i, k] < r and D[j, k] < r):
                    continue
                nt += 1
                if max_dim < 3:
                    continue
                for l in range(k + 1, n):
                    if D[i, l] < r and D[j, l] < r and D[k, l] < r:
                        nq += 1
    return ne, nt, nq


@numba.njit(cache=True)
def _fill_simplices(D, r, max_dim, ne, nt, nq):
    n = D.shape[0]
    E = np.empty((ne, 2), dtype=np.int32)
    T = np.empty((nt, 3), dtype=np.int32)
    Q = np.empty((nq, 4), dtype=np.int32)
    dE = np.empty(ne)
    dT = np.empty(nt)
    dQ = np.empty(nq)
    ie = 0
    it = 0
    iq = 0
    for i in range(n):
        for j in range(i + 1, n):
            dij = D[i, j]
            if not dij < r:
                continue
            E[ie, 0] = i
            E[ie, 1] = j
            dE[ie] = dij
            ie += 1
            if max_dim < 2:
                continue
            for k in range(j + 1, n):
                if not (D[i, k] < r and D[j, k] < r):
                    continue
                dijk = max(dij, D[i, k], D[j, k])
                T[it, 0] = i
                T[it, 1] = j
                T[it, 2] = k
                dT[it] = dijk
                it += 1
                if max_dim < 3:
                    continue
                for l in range(k + 1, n):
                    if D[i, l] < r and D[j, l] < r and D[k, l] < r:
                        Q[iq, 0] = i
                        Q[iq, 1] = j
                        Q[iq, 2] = k
                        Q[iq, 3] = l
                        dQ[iq] = max(dijk, D[i, l], D[j, l], D[k, l])
                        iq += 1
    return E, T, Q, dE, dT, dQ


def _binomials(n, kmax=4):
    """table[v, t] = C(v, t) for v < n, t <= kmax."""
    table = np.zeros((max(n, 1), kmax + 1), dtype=np.int64)
    table[:, 0] = 1
    for v in range(1, n):
        for t in range(1, kmax + 1):
            table[v, t] = table[v - 1, t - 1] + table[v - 1, t]
    return table


def _colex_keys(verts, binom):
    """Combinatorial-number-system index of each sorted vertex tuple."""
    keys = np.zeros(len(verts), dtype=np.int64)
    for t in range(verts.shape[1]):
        keys += binom[verts[:, t], t + 1]
    return keys


def rips_filtration(dm, max_dim=3, r_max=None, cap=DEFAULT_SIMPLEX_CAP):
    """Every simplex of dimension <= `max_dim` with diameter strictly below `r_max`."""
    D = np.ascontiguousarray(dm, dtype=np.float64)
    n = D.shape[0]
    if r_max is None:
        r_max = np.nextafter(D.max(), np.inf) if n > 1 else 1.0
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    if not 0 <= max_dim <= 3:
        raise ValueError("max_dim must be between 0 and 3")
    if (n ** 4) // 24 > np.iinfo(np.int64).max // 4:
        raise ComplexityCapError(n ** 4 // 24, cap)

    ne, nt, nq = _count_simplices(D, float(r_max), max_dim)
    total = n + ne + nt + nq
    if total > cap:
        raise ComplexityCapError(total, cap)
    E, T, Q, dE, dT, dQ = _fill_simplices(D, float(r_max), max_dim, ne, nt, nq)
    blocks = [np.arange(n, dtype=np.int32)[:, None], E, T, Q][: max_dim + 1]
    diams = [np.zeros(n), dE, dT, dQ][: max_dim + 1]
    binom = _binomials(n)

    vertices, diameters, lookup = [], [], []
    for verts, diam in zip(blocks, diams):
        order = np.argsort(diam, kind="stable")  # enumeration is lex, so ties stay lex
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        vertices.append(verts[order])
        diameters.append(diam[order])
        keys = _colex_keys(verts, binom)
        full = binom[n - 1, verts.shape[1]] + binom[n - 1, verts.shape[1] - 1] if n > 1 else len(keys)
        if full <= DENSE_LOOKUP_LIMIT:
            table = np.full(full, -1, dtype=np.int64)
            table[keys] = rank
            lookup.append((np.empty(0, dtype=np.int64), table))
        else:
            srt = np.argsort(keys)
            lookup.append((keys[srt], rank[srt]))
    return Filtration(D, float(r_max), max_dim, vertices, diameters, binom, lookup)


# ---------------------------------------------------------------------------
# reduction

@numba.njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True)
def _pair_dim0(n, edges):
    """Union-find over edges in filtration order; returns the merging-edge mask."""
    parent = np.arange(n)
    merges = np.zeros(len(edges), dtype=np.bool_)
    for e in range(len(edges)):
        a = _find(parent, edges[e, 0])
        b = _find(parent, edges[e, 1])
        if a != b:
            # every vertex is born at 0, so the elder rule reduces to any fixed choice
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            merges[e] = True
    return merges


@numba.njit(cache=True)
def _symdiff(a, b):
    out = np.empty(len(a) + len(b), dtype=a.dtype)
    i = 0
    j = 0
    k = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif b[j] < a[i]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < len(a):
        out[k] = a[i]
        i += 1
        k += 1
    while j < len(b):
        out[k] = b[j]
        j += 1
        k += 1
    return out[:k]


@numba.njit(cache=True)
def _coboundary(D, r, simplex, binom, row_keys, row_rank):
    """Filtration ranks (ascending) of the cofaces of `simplex` present below `r`."""
    n = D.shape[0]
    q = len(simplex)
    buf = np.empty(n, dtype=np.int64)
    cnt = 0
    for v in range(n):
        ok = True
        for t in range(q):
            u = simplex[t]
            if u == v or not D[u, v] < r:
                ok = False
                break
        if not ok:
            continue
        key = np.int64(0)
        shift = 0
        for t in range(q):
            u = simplex[t]
            if shift == 0 and v < u:
                key += binom[v, t + 1]
                shift = 1
            key += binom[u, t + 1 + shift]
        if shift == 0:
            key += binom[v, q + 1]
        if len(row_keys) == 0:
            buf[cnt] = row_rank[key]
        else:
            buf[cnt] = row_rank[np.searchsorted(row_keys, key)]
        cnt += 1
    return np.sort(buf[:cnt])


@numba.njit(cache=True)
def _reduce_coboundary(D, r, cols, cleared, binom, row_keys, row_rank, n_rows):
    """Persistent cohomology column reduction for one dimension.

    Columns are processed from the last simplex to the first; the pivot of a
    column is its earliest coface. Returns, per column, the rank of the
    paired coface, -1 for an essential class, or -2 for a cleared column.
    """
    n_cols = cols.shape[0]
    death = np.full(n_cols, -2, dtype=np.int64)
    owner = np.full(n_rows, -1, dtype=np.int64)
    stored = numba.typed.List()
    stored.append(np.empty(0, dtype=np.int64))  # placeholder to fix the item type
    for c in range(n_cols - 1, -1, -1):
        if cleared[c]:
            continue
        col = _coboundary(D, r, cols[c], binom, row_keys, row_rank)
        while len(col) > 0 and owner[col[0]] != -1:
            col = _symdiff(col, stored[owner[col[0]]])
        if len(col) == 0:
            death[c] = -1
        else:
            owner[col[0]] = len(stored)
            stored.append(col)
            death[c] = col[0]
    return death


def reduce(filtration):
    """Persistence intervals in dimensions 0 .. max_dim - 1 (at most 2)."""
    f = filtration
    D, r, n = f.dm, f.r_max, f.n_points
    dims, births, deaths = [], [], []

    top = min(f.max_dim - 1, 2)
    if f.max_dim >= 1:
        merges = _pair_dim0(n, f.vertices[1])
        dmerge = f.diameters[1][merges]
        n_inf = n - len(dmerge)
    else:
        merges = np.zeros(0, dtype=bool)
        dmerge = np.zeros(0)
        n_inf = n
    dims.append(np.zeros(n, dtype=np.int64))
    births.append(np.zeros(n))
    deaths.append(np.concatenate([dmerge, np.full(n_inf, np.inf)]))

    cleared = merges
    for k in range(1, top + 1):
        cols = np.ascontiguousarray(f.vertices[k], dtype=np.int64)
        death = _reduce_coboundary(
            D, r, cols, np.ascontiguousarray(cleared), f._binom, *f._lookup[k + 1],
            len(f.diameters[k + 1]),
        )
        live = death != -2
        d = np.full(live.sum(), np.inf)
        fin = death[live] >= 0
        d[fin] = f.diameters[k + 1][death[live][fin]]
        dims.append(np.full(live.sum(), k, dtype=np.int64))
        births.append(f.diameters[k][live])
        deaths.append(d)
        cleared = np.zeros(len(f.diameters[k + 1]), dtype=bool)
        cleared[death[death >= 0]] = True

    return Barcode(np.concatenate(dims), np.concatenate(births), np.concatenate(deaths))


def betti_series(barcode, grid, dims=BETTI_DIMS):
    """beta_k on every grid value: intervals with birth < eps <= death."""
    eps = np.asarray(getattr(grid, "values", grid), dtype=np.float64)
    channels = np.zeros((len(dims), eps.size))
    for c, k in enumerate(dims):
        sel = barcode.dims == k
        b = np.sort(barcode.births[sel])
        d = np.sort(barcode.deaths[sel])
        channels[c] = np.searchsorted(b, eps, side="left") - np.searchsorted(d, eps, side="left")
    if not isinstance(grid, EpsilonGrid):
        grid = EpsilonGrid(values=eps, r_max=float(eps[-1]) if eps.size else 0.0)
    return EpsilonSeries(channels=channels, grid=grid, kind="betti")


def betti_features(dm, grid, dims=BETTI_DIMS, cap=DEFAULT_SIMPLEX_CAP):
    """Full Betti pipeline for one cloud: filtration up to tetrahedra, reduce, sample the grid."""
    max_dim = min(max(dims) + 1, 3)
    eps = np.asarray(getattr(grid, "values", grid), dtype=np.float64)
    # simplices with diameter >= the largest eps are never born on the grid, and
    # the classes they kill are still alive there, so they can be left out
    r = float(eps.max())
    filt = rips_filtration(dm, max_dim=max_dim, r_max=r, cap=cap)
    return betti_series(reduce(filt), grid, dims)


# ---------------------------------------------------------------------------
# brute-force oracle

def gf2_rank(matrix):
    """Rank over GF(2) by Gaussian elimination."""
    m = np.array(matrix, dtype=bool, copy=True)
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        below = np.flatnonzero(m[:, c])
        below = below[below != rank]
        m[below] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _naive_simplices(dm, eps, k):
    n = dm.shape[0]
    if k < 0:
        return []
    return [
        s for s in combinations(range(n), k + 1)
        if all(dm[a, b] < eps for a, b in combinations(s, 2))
    ]


def boundary_matrix(faces, simplices):
    index = {f: i for i, f in enumerate(faces)}
    m = np.zeros((len(faces), len(simplices)), dtype=bool)
    for j, s in enumerate(simplices):
        for drop in range(len(s)):
            m[index[s[:drop] + s[drop + 1:]], j] = True
    return m


def boundary_rank(dm, eps, k):
    """Rank of the boundary map from k-simplices to (k-1)-simplices at scale eps."""
    if k <= 0:
        return 0
    faces = _naive_simplices(dm, eps, k - 1)
    simplices = _naive_simplices(dm, eps, k)
    if not faces or not simplices:
        return 0
    return gf2_rank(boundary_matrix(faces, simplices))


def betti_naive(dm, eps, k):
    """beta_k at one scale from explicit boundary-matrix ranks. Exponential; tiny clouds only."""
    dm = np.asarray(dm, dtype=np.float64)
    if dm.shape[0] > ORACLE_MAX_POINTS:
        raise OracleScaleError(
            f"oracle limited to {ORACLE_MAX_POINTS} points, got {dm.shape[0]}"
        )
    n_k = len(_naive_simplices(dm, eps, k))
    return n_k - boundary_rank(dm, eps, k) - boundary_rank(dm, eps, k + 1)
