"""Pure-numpy fallback for the Lloyd kernels.

Distances are computed exactly, (x - c)**2 summed per dimension, in
chunks over the points so memory stays bounded for large n * k.
"""

import numpy as np

_CHUNK = 2048


def assign_nearest(points, centroids):
    """Return (labels, sqdist): nearest centroid per point and the squared
    Euclidean distance to it. Ties go to the lowest centroid index."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    sqdist = np.empty(n, dtype=np.float64)
    for start in range(0, n, _CHUNK):
        block = points[start : start + _CHUNK]
        d2 = ((block[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        best = d2.argmin(axis=1)
        labels[start : start + _CHUNK] = best
        sqdist[start : start + _CHUNK] = d2[np.arange(block.shape[0]), best]
    return labels, sqdist


def centroid_update(points, labels, k):
    """Return (sums, counts): per-cluster coordinate sums and member counts."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts
