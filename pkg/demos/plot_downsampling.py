"""
Downsampling a noisy chirp
==========================

Four ways to shrink a series to a fixed number of points, and how the
variance-weighted rebucketing moves buckets toward the busy part of the signal.
"""
import numpy as np

from tsgeo.downsample import bucket_average, dropout, dynamic_buckets, lttb, naive_buckets

rng = np.random.default_rng(0)
t = np.linspace(0, 1, 400)
y = np.sin(2 * np.pi * 8 * t ** 3) + 0.05 * rng.normal(size=t.size)

###############################################################################
# Equal-width buckets: 40 interior buckets plus the two endpoints.
bk = naive_buckets(len(y), 40)
print("bucket sizes:", bk.sizes[:6], "...")

for name, out in [("dropout", dropout(y, bk)),
                  ("mean", bucket_average(y, bk)[:, 1]),
                  ("lttb", lttb(y, bk)[:, 1])]:
    print(f"{name:8s} keeps {len(out)} points, range {out.min():+.2f} .. {out.max():+.2f}")

###############################################################################
# The chirp oscillates fastest at the end. Split/merge passes
# shrink the buckets there and widen them over the slow start.
dyn = dynamic_buckets(y, bk, 10)
for label, b in (("equal-width", bk), ("rebucketed", dyn)):
    starts = np.array(b.edges[1:-2])
    late = int(np.count_nonzero(starts >= len(y) // 2))
    print(f"{label:12s} buckets in first half: {40 - late}, second half: {late}")
