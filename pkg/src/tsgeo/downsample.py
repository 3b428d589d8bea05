"""Bucketings and the downsamplers built on them.

A series of ``n`` points is split into a singleton first bucket, ``m``
contiguous interior buckets and a singleton last bucket. Every downsampler
returns one representative per bucket, so the output has ``m + 2`` points.
x-coordinates are integer sample indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidTargetError


@dataclass(frozen=True)
class Bucketing:
    """Contiguous partition of ``range(n)``; bucket ``i`` is ``range(edges[i], edges[i+1])``."""

    edges: tuple

    def __post_init__(self):
        e = tuple(int(v) for v in self.edges)
        object.__setattr__(self, "edges", e)
        if len(e) < 3:
            raise ValueError("a bucketing needs at least the two endpoint buckets")
        if e[0] != 0:
            raise ValueError("first bucket must start at index 0")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("buckets must be nonempty and in increasing order")
        if e[1] != 1 or e[-1] - e[-2] != 1:
            raise ValueError("first and last buckets must be singletons")

    @classmethod
    def from_sizes(cls, sizes):
        return cls(tuple(np.concatenate([[0], np.cumsum(sizes)]).tolist()))

    @property
    def n_points(self):
        return self.edges[-1]

    @property
    def sizes(self):
        return [b - a for a, b in zip(self.edges, self.edges[1:])]

    @property
    def buckets(self):
        return [range(a, b) for a, b in zip(self.edges, self.edges[1:])]

    @property
    def n_interior(self):
        return len(self.edges) - 3

    def __len__(self):
        return len(self.edges) - 1

    def __getitem__(self, i):
        return self.buckets[i]


def naive_buckets(n_points, m_interior):
    """Even bucketing: remainder of the interior points goes to the earliest buckets."""
    if n_points < 2 or m_interior < 0 or n_points < m_interior + 2:
        raise InvalidTargetError(
            f"cannot cover {n_points} points with {m_interior} interior buckets"
        )
    interior = n_points - 2
    if m_interior == 0:
        if interior:
            raise InvalidTargetError(f"{interior} interior points need at least one bucket")
        return Bucketing((0, 1, 2))
    base, extra = divmod(interior, m_interior)
    sizes = [1] + [base + 1] * extra + [base] * (m_interior - extra) + [1]
    return Bucketing.from_sizes(sizes)


def _values(series):
    v = getattr(series, "values", series)
    return np.asarray(v, dtype=np.float64)


def _check_cover(y, bk):
    if bk.n_points != y.size:
        raise ValueError(f"bucketing covers {bk.n_points} points, series has {y.size}")


def dropout(series, bk):
    y = _values(series)
    _check_cover(y, bk)
    return y[np.asarray(bk.edges[:-1])].copy()


def _bucket_means(y, bk):
    starts = np.asarray(bk.edges[:-1])
    sizes = np.diff(bk.edges)
    idx = np.arange(y.size, dtype=np.float64)
    return np.column_stack([
        np.add.reduceat(idx, starts) / sizes,
        np.add.reduceat(y, starts) / sizes,
    ])


def bucket_average(series, bk):
    """Per-bucket mean of (index, value); the endpoints are passed through."""
    y = _values(series)
    _check_cover(y, bk)
    pts = _bucket_means(y, bk)
    pts[0] = (0.0, y[0])
    pts[-1] = (y.size - 1.0, y[-1])
    return pts


def triangle_area(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    return abs(ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) / 2.0


def lttb_indices(series, bk):
    """Indices chosen by largest-triangle-three-buckets, left to right."""
    y = _values(series)
    _check_cover(y, bk)
    if len(bk) < 3:
        raise InvalidTargetError("LTTB needs at least one interior bucket")
    means = _bucket_means(y, bk)
    edges = bk.edges
    chosen = [0]
    prev_x, prev_y = 0.0, y[0]
    for i in range(1, len(bk) - 1):
        a, b = edges[i], edges[i + 1]
        # the last bucket is a singleton, so its mean is the final point itself
        nx, ny = means[i + 1]
        xs = np.arange(a, b, dtype=np.float64)
        areas = np.abs(prev_x * (y[a:b] - ny) + xs * (ny - prev_y) + nx * (prev_y - y[a:b])) / 2.0
        j = a + int(np.argmax(areas))  # first maximum -> lowest index
        chosen.append(j)
        prev_x, prev_y = float(j), y[j]
    chosen.append(y.size - 1)
    return np.asarray(chosen, dtype=np.intp)


def lttb(series, bk):
    y = _values(series)
    idx = lttb_indices(y, bk)
    return np.column_stack([idx.astype(np.float64), y[idx]])


def ols_sse(points):
    """Residual sum of squares of the least-squares line through `points` ((k, 2) array)."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if p.shape[0] <= 2:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        return 0.0
    dy = y - y.mean()
    resid = dy - (float(dx @ dy) / sxx) * dx
    return float(resid @ resid)


def _bucket_sse(y, start, stop):
    return ols_sse(np.column_stack([np.arange(start, stop, dtype=np.float64), y[start:stop]]))


def dynamic_buckets(series, bk, p, history=None):
    """Variance-weighted rebucketing: ``p`` splits of the worst-fit bucket, then ``p`` merges.

    Splits take the interior bucket with the largest OLS residual (skipping
    singletons, which cannot be split) and cut it at ``floor(size/2)``. Merges
    then join the adjacent interior pair with the smallest summed residual.
    If fewer than ``p`` splits were possible, the same smaller number of
    merges is done, so the bucket count is always preserved.

    If `history` is a list, ``("split", i)`` / ``("merge", i)`` events are
    appended to it, ``i`` being the bucket index at the time of the event.
    """
    y = _values(series)
    _check_cover(y, bk)
    if p < 0:
        raise ValueError("iteration count must be >= 0")
    edges = list(bk.edges)
    # sse[i] caches the residual of bucket i; only touched buckets are refit
    sse = [_bucket_sse(y, edges[i], edges[i + 1]) for i in range(len(edges) - 1)]

    splits = 0
    for _ in range(p):
        best, best_sse = None, -1.0
        for i in range(1, len(sse) - 1):
            if edges[i + 1] - edges[i] < 2:
                continue
            if sse[i] > best_sse:
                best, best_sse = i, sse[i]
        if best is None:
            break
        a, b = edges[best], edges[best + 1]
        mid = a + (b - a) // 2
        edges.insert(best + 1, mid)
        sse[best:best + 1] = [_bucket_sse(y, a, mid), _bucket_sse(y, mid, b)]
        splits += 1
        if history is not None:
            history.append(("split", best))

    for _ in range(splits):
        best, best_cost = None, np.inf
        for i in range(1, len(sse) - 2):
            cost = sse[i] + sse[i + 1]
            if cost < best_cost:
                best, best_cost = i, cost
        del edges[best + 1]
        sse[best:best + 2] = [_bucket_sse(y, edges[best], edges[best + 1])]
        if history is not None:
            history.append(("merge", best))
    return Bucketing(tuple(edges))


METHODS = ("dropout", "mean", "lttb")


def downsample(series, resolution, method, dynamic_p=0):
    """Downsample `series` to `resolution` points; returns (x, y) arrays.

    ``resolution`` counts the endpoints, so it uses ``resolution - 2`` interior buckets.
    """
    y = _values(series)
    bk = naive_buckets(y.size, resolution - 2)
    if dynamic_p:
        bk = dynamic_buckets(y, bk, dynamic_p)
    if method == "dropout":
        return np.asarray(bk.edges[:-1], dtype=np.float64), dropout(y, bk)
    if method == "mean":
        pts = bucket_average(y, bk)
    elif method == "lttb":
        pts = lttb(y, bk)
    else:
        raise ValueError(f"unknown downsampling method {method!r}; expected one of {METHODS}")
    return pts[:, 0], pts[:, 1]
