# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Lloyd kernels: exact nearest-centroid assignment and centroid
accumulation. Semantics match the numpy fallback in _lloyd_np."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def assign_nearest(points, centroids):
    """Return (labels, sqdist); ties go to the lowest centroid index."""
    cdef double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], k = c.shape[0]
    labels_arr = np.empty(n, dtype=np.int64)
    sqdist_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] labels = labels_arr
    cdef double[::1] sqdist = sqdist_arr
    cdef Py_ssize_t i, j, m
    cdef double best, dist, diff
    cdef Py_ssize_t best_j
    for i in range(n):
        best = -1.0
        best_j = 0
        for j in range(k):
            dist = 0.0
            for m in range(d):
                diff = x[i, m] - c[j, m]
                dist += diff * diff
            if best < 0.0 or dist < best:
                best = dist
                best_j = j
        labels[i] = best_j
        sqdist[i] = best
    return labels_arr, sqdist_arr


def centroid_update(points, labels, k):
    """Return (sums, counts) accumulated over points by cluster label."""
    cdef double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef long long[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    sums_arr = np.zeros((k, d), dtype=np.float64)
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t i, m
    cdef long long g
    for i in range(n):
        g = lab[i]
        counts[g] += 1
        for m in range(d):
            sums[g, m] += x[i, m]
    return sums_arr, counts_arr
