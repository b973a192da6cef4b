"""Sample-quality metrics: cluster-coverage chi-square, model rankings,
rank-correlation bootstrap, OOD accounting, mean DMOS.

All functions are pure in their inputs; bootstrap rounds use seeds
derived from the base seed and the round index, so rounds can run in any
order (or in parallel) with identical aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .clustering import ClusterModel
from .dataset import CHANNELS, ClipCollection, dmos_matrix
from .sampling import SampleManifest, SamplingConfig, config_for_round, draw_sample
from .stats import chi2_sf


class MetricError(ValueError):
    """Invalid metric input (constant vectors, empty sets, missing cells)."""


@dataclass
class DiversityReport:
    chi2: float
    p_value: float
    cluster_counts: list[int]


@dataclass
class ModelRanking:
    model_ids: list[str]
    mean_dmos: np.ndarray  # per model, chosen channel
    ranks: np.ndarray  # 1 = highest mean DMOS, ties averaged


@dataclass
class RankingFidelity:
    srcc_mean: float
    srcc_std: float
    ci95_low: float
    ci95_high: float
    bootstrap_rounds: int


@dataclass
class OodReport:
    fraction: float
    n_labeled: int
    n_unlabeled: int


@dataclass
class ChannelStat:
    mean: float
    ci95_low: float
    ci95_high: float
    count: int


def _rankdata(values) -> np.ndarray:
    """Ascending ranks starting at 1, ties averaged."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def srcc(scores_a, scores_b) -> float:
    """Spearman rank correlation: Pearson correlation of tie-averaged ranks."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise MetricError("srcc needs two equal-length vectors of length >= 2")
    ra, rb = _rankdata(a), _rankdata(b)
    da, db = ra - ra.mean(), rb - rb.mean()
    denom = np.sqrt((da**2).sum() * (db**2).sum())
    if denom == 0.0:
        raise MetricError("srcc undefined for a constant input vector")
    return float(np.clip((da * db).sum() / denom, -1.0, 1.0))


def chi_square_uniformity(cluster_counts: Sequence[int]) -> DiversityReport:
    """Chi-square distance of the per-cluster percentage distribution from
    uniform; p-value from the survival function with k-1 degrees of freedom."""
    counts = np.asarray(cluster_counts, dtype=np.float64)
    if counts.size < 2:
        raise MetricError("need at least 2 clusters")
    if np.any(counts < 0):
        raise MetricError("counts must be non-negative")
    total = counts.sum()
    if total == 0:
        raise MetricError("all-zero counts")
    percentages = 100.0 * counts / total
    expected = 100.0 / counts.size
    chi2 = float(((percentages - expected) ** 2 / expected).sum())
    return DiversityReport(
        chi2=chi2,
        p_value=chi2_sf(chi2, counts.size - 1),
        cluster_counts=[int(c) for c in cluster_counts],
    )


def _subset_indices(collection: ClipCollection,
                    sample: Optional[SampleManifest]) -> np.ndarray:
    if sample is None:
        return np.arange(len(collection))
    return np.array([collection.index_of(e.clip_id) for e in sample.entries], dtype=np.int64)


def rank_models(collection: ClipCollection, channel: str,
                sample: Optional[SampleManifest] = None) -> ModelRanking:
    """Per-model mean DMOS over the clip set (full collection, or a sample
    manifest) and the resulting ordinal ranks, rank 1 = highest mean."""
    mat = dmos_matrix(collection, channel)
    idx = _subset_indices(collection, sample)
    if idx.size == 0:
        raise MetricError("empty clip set")
    means = mat[idx].mean(axis=0)
    ranks = _rankdata(-means)
    return ModelRanking(model_ids=list(collection.model_ids), mean_dmos=means, ranks=ranks)


def sample_cluster_counts(sample: SampleManifest, collection: ClipCollection,
                          cluster_model: ClusterModel) -> np.ndarray:
    """Sampled-clip counts per cluster, looked up through the model's
    assignments (independent of the indices stored in the manifest)."""
    idx = _subset_indices(collection, sample)
    return np.bincount(cluster_model.assignments[idx], minlength=cluster_model.k)


def bootstrap_srcc(collection: ClipCollection, cluster_model: Optional[ClusterModel],
                   config: SamplingConfig, rounds: int = 200) -> RankingFidelity:
    """Repeat the configured draw with round-derived seeds; report mean,
    standard deviation, and the percentile 95% CI of the SRCC between the
    sample ranking and the full-data ranking."""
    if rounds < 2:
        raise MetricError("rounds must be >= 2")
    full = rank_models(collection, config.channel)
    mat = dmos_matrix(collection, config.channel)
    values = np.empty(rounds, dtype=np.float64)
    for r in range(rounds):
        sample = draw_sample(collection, cluster_model, config_for_round(config, r))
        idx = _subset_indices(collection, sample)
        means = mat[idx].mean(axis=0)
        values[r] = srcc(means, full.mean_dmos)
    return RankingFidelity(
        srcc_mean=float(values.mean()),
        srcc_std=float(values.std(ddof=1)),
        ci95_low=float(np.percentile(values, 2.5)),
        ci95_high=float(np.percentile(values, 97.5)),
        bootstrap_rounds=rounds,
    )


def ood_fraction(sample: SampleManifest, collection: ClipCollection,
                 baseline_labels: Iterable[str]) -> OodReport:
    """Fraction of labeled sampled clips whose noise label is outside the
    baseline set; unlabeled clips are excluded and counted separately."""
    baseline = set(baseline_labels)
    labeled = 0
    unlabeled = 0
    ood = 0
    for entry in sample.entries:
        label = collection.records[collection.index_of(entry.clip_id)].noise_label
        if label is None:
            unlabeled += 1
            continue
        labeled += 1
        if label not in baseline:
            ood += 1
    if labeled == 0:
        raise MetricError("no labeled clips in the sample")
    return OodReport(fraction=ood / labeled, n_labeled=labeled, n_unlabeled=unlabeled)


def top_categories(sample: SampleManifest, collection: ClipCollection,
                   baseline_labels: Iterable[str], n: int = 10):
    """(ood, in_distribution) lists of (category, count), sorted by
    descending count then category name, truncated to n."""
    if n < 1:
        raise MetricError("n must be >= 1")
    baseline = set(baseline_labels)
    counts: dict[str, int] = {}
    for entry in sample.entries:
        label = collection.records[collection.index_of(entry.clip_id)].noise_label
        if label is not None:
            counts[label] = counts.get(label, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ood = [(cat, cnt) for cat, cnt in ordered if cat not in baseline][:n]
    ind = [(cat, cnt) for cat, cnt in ordered if cat in baseline][:n]
    return ood, ind


def mean_dmos(sample: Optional[SampleManifest], collection: ClipCollection,
              model_ids: Optional[Sequence[str]] = None) -> dict[str, ChannelStat]:
    """Per-channel mean DMOS over all (clip, model) cells, with a normal
    95% CI (1.96 * sd / sqrt(count))."""
    if model_ids is None:
        model_ids = collection.model_ids
    cols = [collection.model_ids.index(m) for m in model_ids]
    idx = _subset_indices(collection, sample)
    if idx.size == 0 or not cols:
        raise MetricError("empty sample or model set")
    out: dict[str, ChannelStat] = {}
    for channel in CHANNELS:
        cells = dmos_matrix(collection, channel)[np.ix_(idx, cols)].ravel()
        mean = float(cells.mean())
        half = 0.0
        if cells.size > 1:
            half = 1.96 * float(cells.std(ddof=1)) / np.sqrt(cells.size)
        out[channel] = ChannelStat(
            mean=mean, ci95_low=mean - half, ci95_high=mean + half, count=int(cells.size)
        )
    return out
