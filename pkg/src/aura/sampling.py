"""Budget-limited subset selection.

Weighted draws use the exponential-key scheme (key = log(u)/w, keep the
largest), which realizes probability-proportional-to-size sampling
without replacement. Stratified modes allocate a per-cluster quota of
floor(budget/k), hand the remainder to the largest clusters, and
redistribute any deficit from undersized clusters proportionally to the
remaining cluster sizes.

Per-cluster draws derive their stream as seed XOR cluster index, so
clusters can be drawn in parallel with results identical to a sequential
run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .clustering import ClusterModel
from .dataset import CHANNELS, ClipCollection, dmos_matrix

MODES = ("hardness", "ranking", "random", "diversity", "variance")
DEFAULT_EPSILON = 0.05


class SamplingError(ValueError):
    """Invalid sampling configuration or inputs."""


@dataclass(frozen=True)
class SamplingConfig:
    budget: int
    mode: str
    channel: str = "ovrl"
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.budget < 1:
            raise SamplingError("budget must be positive")
        if self.mode not in MODES:
            raise SamplingError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.channel not in CHANNELS:
            raise SamplingError(f"channel must be one of {CHANNELS}")
        if self.epsilon <= 0:
            raise SamplingError("epsilon must be > 0")
        if self.seed < 0:
            raise SamplingError("seed must be non-negative")


@dataclass(frozen=True)
class SampleEntry:
    clip_id: str
    cluster_index: int  # -1 when drawn without a cluster model
    weight: float  # pre-normalization weight


@dataclass
class SampleManifest:
    entries: list[SampleEntry]
    config: SamplingConfig
    strategy_name: str

    def clip_ids(self) -> list[str]:
        return [e.clip_id for e in self.entries]


def hardness_weights(dmos_values, epsilon: float) -> np.ndarray:
    """Probabilities decreasing in DMOS: w_i = max_j d_j - d_i + epsilon,
    normalized. The most degraded (lowest DMOS) clip gets the largest weight."""
    vals = np.asarray(dmos_values, dtype=np.float64)
    if vals.size == 0:
        raise SamplingError("dmos_values must be non-empty")
    if epsilon <= 0:
        raise SamplingError("epsilon must be > 0")
    w = vals.max() - vals + epsilon
    return w / w.sum()


def variance_weights(dmos_rows, epsilon: float) -> np.ndarray:
    """Probabilities proportional to the population variance of each
    clip's per-model DMOS, floored by epsilon."""
    rows = np.asarray(dmos_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise SamplingError("variance weighting needs at least 2 models per clip")
    w = rows.var(axis=1) + epsilon
    return w / w.sum()


def _raw_mode_weights(mode: str, dmos_mat: Optional[np.ndarray], epsilon: float,
                      indices: np.ndarray) -> np.ndarray:
    """Pre-normalization weights for a subset of clips (rows of dmos_mat)."""
    if mode == "diversity" or mode == "random":
        return np.ones(indices.size, dtype=np.float64)
    if mode == "hardness":
        per_clip = dmos_mat[indices].mean(axis=1)
        return per_clip.max() - per_clip + epsilon
    if mode in ("ranking", "variance"):
        if dmos_mat.shape[1] < 2:
            raise SamplingError("variance weighting needs at least 2 models")
        return dmos_mat[indices].var(axis=1) + epsilon
    raise SamplingError(f"unknown mode {mode!r}")


def weighted_sample_without_replacement(ids: Sequence, weights, quota: int,
                                        rng: np.random.Generator) -> list:
    """Exponential-key PPS draw without replacement: key_i = log(u_i)/w_i,
    keep the quota largest keys."""
    weights = np.asarray(weights, dtype=np.float64)
    n = len(ids)
    if weights.shape != (n,):
        raise SamplingError("ids and weights must have the same length")
    if np.any(weights <= 0):
        raise SamplingError("weights must be strictly positive")
    if quota > n:
        raise SamplingError(f"quota {quota} exceeds population {n}")
    if quota == n:
        return list(ids)
    u = rng.random(n)
    keys = np.log(u) / weights
    top = np.argpartition(-keys, quota - 1)[:quota] if quota > 0 else np.array([], dtype=int)
    top = top[np.argsort(-keys[top], kind="stable")]
    return [ids[i] for i in top]


def allocate_quotas(sizes: Sequence[int], budget: int) -> list[int]:
    """Per-cluster quotas: floor(budget/k) each, remainder one-per-cluster
    to the largest clusters, deficits from undersized clusters pushed back
    proportionally to the remaining cluster sizes (largest-remainder
    rounding, lowest index on ties)."""
    sizes = [int(s) for s in sizes]
    k = len(sizes)
    total = sum(sizes)
    if budget > total:
        raise SamplingError(f"budget {budget} exceeds population {total}")
    base, rem = divmod(budget, k)
    quotas = [base] * k
    by_size = sorted(range(k), key=lambda c: (-sizes[c], c))
    for c in by_size[:rem]:
        quotas[c] += 1

    while True:
        overflow = sum(max(0, quotas[c] - sizes[c]) for c in range(k))
        if overflow == 0:
            return quotas
        quotas = [min(quotas[c], sizes[c]) for c in range(k)]
        room = [sizes[c] - quotas[c] for c in range(k)]
        room_total = sum(room)
        shares = [overflow * room[c] / room_total for c in range(k)]
        extra = [min(int(share), room[c]) for c, share in enumerate(shares)]
        leftover = overflow - sum(extra)
        frac_order = sorted(
            (c for c in range(k) if room[c] - extra[c] > 0),
            key=lambda c: (-(shares[c] - int(shares[c])), c),
        )
        i = 0
        while leftover > 0:
            c = frac_order[i % len(frac_order)]
            if extra[c] < room[c]:
                extra[c] += 1
                leftover -= 1
            i += 1
        quotas = [quotas[c] + extra[c] for c in range(k)]


def stratified_sample(collection: ClipCollection, cluster_model: ClusterModel,
                      config: SamplingConfig) -> SampleManifest:
    """Per-cluster PPS draw under the configured mode (hardness, ranking,
    or diversity)."""
    if config.mode not in ("hardness", "ranking", "diversity"):
        raise SamplingError(f"stratified_sample does not support mode {config.mode!r}")
    n = len(collection)
    if config.budget > n:
        raise SamplingError(f"budget {config.budget} exceeds collection size {n}")
    if len(cluster_model.assignments) != n:
        raise SamplingError("cluster model does not cover the collection")

    dmos_mat = None
    if config.mode in ("hardness", "ranking"):
        dmos_mat = dmos_matrix(collection, config.channel)

    k = cluster_model.k
    sizes = cluster_model.cluster_sizes()
    quotas = allocate_quotas(sizes, config.budget)

    entries: list[SampleEntry] = []
    for c in range(k):
        quota = quotas[c]
        if quota == 0:
            continue
        members = np.flatnonzero(cluster_model.assignments == c)
        raw = _raw_mode_weights(config.mode, dmos_mat, config.epsilon, members)
        rng = np.random.default_rng(config.seed ^ c)
        picked = weighted_sample_without_replacement(list(members), raw, quota, rng)
        weight_of = dict(zip(members.tolist(), raw.tolist()))
        for idx in picked:
            entries.append(SampleEntry(
                clip_id=collection.records[idx].clip_id,
                cluster_index=c,
                weight=weight_of[idx],
            ))
    return SampleManifest(entries=entries, config=config, strategy_name=config.mode)


def global_sample(collection: ClipCollection, config: SamplingConfig) -> SampleManifest:
    """Unstratified draw over the whole collection with the mode's weights
    (uniform for random/diversity)."""
    n = len(collection)
    if config.budget > n:
        raise SamplingError(f"budget {config.budget} exceeds collection size {n}")
    rng = np.random.default_rng(config.seed)
    indices = np.arange(n)
    if config.mode == "random":
        picked = rng.permutation(n)[: config.budget].tolist()
        raw = {i: 1.0 for i in picked}
    else:
        dmos_mat = None
        if config.mode in ("hardness", "ranking", "variance"):
            dmos_mat = dmos_matrix(collection, config.channel)
        weights = _raw_mode_weights(config.mode, dmos_mat, config.epsilon, indices)
        picked = weighted_sample_without_replacement(indices.tolist(), weights, config.budget, rng)
        raw = {i: weights[i] for i in picked}
    entries = [
        SampleEntry(clip_id=collection.records[i].clip_id, cluster_index=-1, weight=float(raw[i]))
        for i in picked
    ]
    return SampleManifest(entries=entries, config=config, strategy_name=config.mode)


def baseline_random(collection: ClipCollection, budget: int, seed: int) -> SampleManifest:
    """Uniform sample without replacement."""
    config = SamplingConfig(budget=budget, mode="random", seed=seed)
    return global_sample(collection, config)


def baseline_variance(collection: ClipCollection, budget: int, channel: str,
                      seed: int, epsilon: float = DEFAULT_EPSILON) -> SampleManifest:
    """Global (unclustered) PPS draw weighted by per-clip DMOS variance."""
    config = SamplingConfig(budget=budget, mode="variance", channel=channel,
                            seed=seed, epsilon=epsilon)
    return global_sample(collection, config)


def draw_sample(collection: ClipCollection, cluster_model: Optional[ClusterModel],
                config: SamplingConfig) -> SampleManifest:
    """Dispatch a draw for any mode; cluster-aware modes fall back to a
    global draw when no cluster model is supplied."""
    if config.mode in ("random", "variance") or cluster_model is None:
        return global_sample(collection, config)
    return stratified_sample(collection, cluster_model, config)


def write_sample_manifest(manifest: SampleManifest, path, k: Optional[int] = None) -> None:
    """JSON-lines file: one header line, then one line per entry."""
    header = {
        "strategy": manifest.strategy_name,
        "seed": manifest.config.seed,
        "budget": manifest.config.budget,
        "k": k,
        "mode": manifest.config.mode,
        "channel": manifest.config.channel,
        "epsilon": manifest.config.epsilon,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for e in manifest.entries:
            fh.write(json.dumps({
                "clip_id": e.clip_id,
                "cluster_index": e.cluster_index,
                "weight": e.weight,
            }) + "\n")


def read_sample_manifest(path) -> SampleManifest:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise SamplingError(f"{path}: empty sample manifest")
    header = json.loads(lines[0])
    config = SamplingConfig(
        budget=header["budget"], mode=header["mode"], channel=header.get("channel", "ovrl"),
        seed=header["seed"], epsilon=header.get("epsilon", DEFAULT_EPSILON),
    )
    entries = []
    for line in lines[1:]:
        obj = json.loads(line)
        entries.append(SampleEntry(
            clip_id=obj["clip_id"],
            cluster_index=int(obj["cluster_index"]),
            weight=float(obj["weight"]),
        ))
    return SampleManifest(entries=entries, config=config, strategy_name=header["strategy"])


def round_seed(base_seed: int, round_index: int) -> int:
    """Derived seed for one bootstrap round; stable across runs."""
    return (base_seed * 1_000_003 + round_index + 1) % (2**62)


def config_for_round(config: SamplingConfig, round_index: int) -> SamplingConfig:
    return replace(config, seed=round_seed(config.seed, round_index))
