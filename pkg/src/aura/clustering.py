"""Embedding-space partitioning: kmeans++ seeding, Lloyd refinement,
Davies-Bouldin model selection.

All distances are Euclidean in the full embedding dimension. Every
operation is deterministic given its seed; returned models are immutable
by convention and safe to share across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .kernels import assign_nearest, centroid_update

CLUSTER_MAGIC = b"AURACLU1"
_HEADER = struct.Struct("<8sII")

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-4
DEFAULT_RESTARTS = 3


class ClusteringError(ValueError):
    """Invalid clustering input or a degenerate model."""


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray  # (k, dim) float64
    assignments: np.ndarray  # (n,) int64, nearest-centroid index per point
    db_index: float
    iterations_run: int
    inertia: float
    inertia_history: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def _as_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ClusteringError("points must be a non-empty 2-d matrix")
    return pts


def kmeanspp_init(points, k: int, seed) -> np.ndarray:
    """Pick k seed centroids: first uniform, the rest with probability
    proportional to the squared distance to the nearest centroid so far."""
    pts = _as_points(points)
    if k < 1:
        raise ClusteringError("k must be >= 1")
    n_distinct = np.unique(pts, axis=0).shape[0]
    if k > n_distinct:
        raise ClusteringError(f"k={k} exceeds the {n_distinct} distinct points")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    n = pts.shape[0]
    chosen = np.empty((k, pts.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    chosen[0] = pts[first]
    if k == 1:
        return chosen
    d2 = ((pts - chosen[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        probs = d2 / d2.sum()
        idx = int(rng.choice(n, p=probs))
        chosen[j] = pts[idx]
        d2 = np.minimum(d2, ((pts - chosen[j]) ** 2).sum(axis=1))
    return chosen


def _repair_empty(labels: np.ndarray, sqdist: np.ndarray, k: int) -> None:
    # Seize the point currently farthest from its centroid for each empty
    # cluster, ascending cluster index; deterministic.
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        donor = int(np.argmax(sqdist))
        old = labels[donor]
        labels[donor] = c
        sqdist[donor] = 0.0
        counts[c] += 1
        counts[old] -= 1


def lloyd(points, init_centroids, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> ClusterModel:
    """Refine initial centroids by alternating assignment and mean updates
    until the largest centroid movement is <= tol or max_iter is hit.

    Empty clusters are repaired by seizing the point farthest from its
    centroid. The returned assignments are recomputed against the final
    centroids so every point indexes its nearest centroid.
    """
    pts = _as_points(points)
    centroids = np.array(init_centroids, dtype=np.float64, copy=True)
    if centroids.ndim != 2 or centroids.shape[1] != pts.shape[1]:
        raise ClusteringError("init_centroids shape does not match points")
    if max_iter < 1:
        raise ClusteringError("max_iter must be >= 1")
    if tol < 0:
        raise ClusteringError("tol must be >= 0")
    k = centroids.shape[0]

    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        labels, sqdist = assign_nearest(pts, centroids)
        _repair_empty(labels, sqdist, k)
        history.append(float(sqdist.sum()))
        sums, counts = centroid_update(pts, labels, k)
        new_centroids = sums / counts[:, None]
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift <= tol:
            break

    # consistent final assignment; repair any cluster emptied by it
    for _ in range(k + 1):
        labels, sqdist = assign_nearest(pts, centroids)
        empty = np.flatnonzero(np.bincount(labels, minlength=k) == 0)
        if empty.size == 0:
            break
        donor = int(np.argmax(sqdist))
        centroids[empty[0]] = pts[donor]

    inertia = float(sqdist.sum())
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=labels,
        db_index=float("nan"),
        iterations_run=iterations,
        inertia=inertia,
        inertia_history=history,
    )


def davies_bouldin(points, model: ClusterModel) -> float:
    """Mean over clusters of the worst (s_i + s_j) / d(c_i, c_j) ratio,
    where s is the mean member-to-centroid distance."""
    pts = _as_points(points)
    k = model.k
    if k < 2:
        raise ClusteringError("Davies-Bouldin needs k >= 2")
    counts = np.bincount(model.assignments, minlength=k)
    if np.any(counts == 0):
        raise ClusteringError("model has an empty cluster")

    dists = np.sqrt(((pts - model.centroids[model.assignments]) ** 2).sum(axis=1))
    scatter = np.zeros(k)
    np.add.at(scatter, model.assignments, dists)
    scatter /= counts

    diff = model.centroids[:, None, :] - model.centroids[None, :, :]
    sep = np.sqrt((diff**2).sum(axis=2))
    off_diag = ~np.eye(k, dtype=bool)
    if np.any(sep[off_diag] == 0.0):
        raise ClusteringError("degenerate centroids")

    ratio = (scatter[:, None] + scatter[None, :]) / np.where(off_diag, sep, np.inf)
    return float(ratio.max(axis=1).mean())


def fit_kmeans(points, k: int, seed: int, restarts: int = DEFAULT_RESTARTS,
               max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> ClusterModel:
    """Best-of-restarts kmeans++/Lloyd run for a fixed k (lowest inertia wins)."""
    if restarts < 1:
        raise ClusteringError("restarts must be >= 1")
    best: ClusterModel | None = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, k, r]))
        init = kmeanspp_init(points, k, rng)
        model = lloyd(points, init, max_iter=max_iter, tol=tol)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


def select_k(points, k_grid, seed: int, restarts: int = DEFAULT_RESTARTS,
             max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> ClusterModel:
    """Fit every k in the grid and return the model with the lowest
    Davies-Bouldin index; ties break toward smaller k."""
    grid = sorted(set(int(k) for k in k_grid))
    if not grid:
        raise ClusteringError("k_grid must be non-empty")
    if grid[0] < 2:
        raise ClusteringError("every k in the grid must be >= 2")
    pts = _as_points(points)
    best: ClusterModel | None = None
    for k in grid:
        model = fit_kmeans(pts, k, seed, restarts=restarts, max_iter=max_iter, tol=tol)
        model.db_index = davies_bouldin(pts, model)
        if best is None or model.db_index < best.db_index:
            best = model
    return best


def assign(model: ClusterModel, point) -> int:
    """Nearest-centroid index for a single point (lowest index on ties)."""
    vec = np.asarray(point, dtype=np.float64)
    if vec.shape != (model.dim,):
        raise ClusteringError(
            f"point has dimension {vec.shape}, model expects ({model.dim},)"
        )
    d2 = ((model.centroids - vec) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def save_cluster_model(model: ClusterModel, sidecar_path, summary_path) -> None:
    """Binary sidecar (header convention shared with embedding files) plus
    a JSON summary."""
    with open(sidecar_path, "wb") as fh:
        fh.write(_HEADER.pack(CLUSTER_MAGIC, model.k, model.dim))
        fh.write(np.ascontiguousarray(model.centroids, dtype=np.float64).tobytes())
        fh.write(struct.pack("<I", len(model.assignments)))
        fh.write(np.ascontiguousarray(model.assignments, dtype="<u4").tobytes())
    summary = {
        "k": model.k,
        "db_index": model.db_index,
        "cluster_sizes": [int(c) for c in model.cluster_sizes()],
        "iterations_run": model.iterations_run,
        "inertia": model.inertia,
    }
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_cluster_model(sidecar_path) -> ClusterModel:
    with open(sidecar_path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ClusteringError(f"{sidecar_path}: truncated header")
        magic, k, dim = _HEADER.unpack(header)
        if magic != CLUSTER_MAGIC:
            raise ClusteringError(f"{sidecar_path}: bad magic {magic!r}")
        centroids = np.frombuffer(fh.read(k * dim * 8), dtype="<f8").reshape(k, dim).copy()
        (n,) = struct.unpack("<I", fh.read(4))
        assignments = np.frombuffer(fh.read(n * 4), dtype="<u4").astype(np.int64)
    model = ClusterModel(
        k=int(k),
        centroids=centroids,
        assignments=assignments,
        db_index=float("nan"),
        iterations_run=0,
        inertia=float("nan"),
    )
    return model
