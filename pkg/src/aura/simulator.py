"""Synthetic workloads with planted ground truth.

Embeddings come from a Gaussian mixture; each clip/model score realizes
an additive DMOS model (model quality + per-component difficulty +
noise). Clean clips carry near-zero DMOS for every model, which mirrors
the dilution effect of clean speech: it offers no information for
ranking. Generation is a pure function of the spec, so identical specs
produce byte-identical collections.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .clustering import ClusterModel, select_k
from .dataset import ClipCollection, ClipRecord, MosPair, MosTriple
from .metrics import (
    DiversityReport,
    OodReport,
    RankingFidelity,
    bootstrap_srcc,
    chi_square_uniformity,
    mean_dmos,
    ood_fraction,
    sample_cluster_counts,
)
from .sampling import (
    SampleManifest,
    SamplingConfig,
    config_for_round,
    draw_sample,
)

log = logging.getLogger(__name__)

STRATEGIES = ("random", "diversity", "variance", "aura")

# experiment strategy -> sampling mode
_STRATEGY_MODE = {
    "random": "random",
    "diversity": "diversity",
    "variance": "variance",
    "aura": "ranking",
}

_BEFORE_MOS = 3.0
_CLEAN_DMOS_LIMIT = 0.01


class SimulatorError(ValueError):
    """Invalid workload specification."""


def well_separated_means(k: int, dim: int, spacing: float) -> np.ndarray:
    """Component means on scaled coordinate axes; pairwise distance is
    spacing * sqrt(2). Requires k <= dim."""
    if k > dim:
        raise SimulatorError(f"need dim >= k to place axis means (k={k}, dim={dim})")
    means = np.zeros((k, dim))
    for c in range(k):
        means[c, c] = spacing
    return means


@dataclass
class WorkloadSpec:
    n_clips: int
    dim: int
    k_true: int
    n_models: int
    model_quality: np.ndarray  # ground-truth mean DMOS per model
    cluster_difficulty: np.ndarray  # per-component DMOS offset
    component_std: float = 0.25
    component_means: Optional[np.ndarray] = None  # defaults to axis placement
    component_spacing: float = 3.0
    noise_std: float = 0.25
    clean_fraction: float = 0.0
    clean_component_bias: float = 0.7  # probability a clean clip lands in component 0
    channel_offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        self.model_quality = np.asarray(self.model_quality, dtype=np.float64)
        self.cluster_difficulty = np.asarray(self.cluster_difficulty, dtype=np.float64)
        if self.k_true < 1:
            raise SimulatorError("k_true must be >= 1")
        if self.n_clips < 1:
            raise SimulatorError("n_clips must be >= 1")
        if self.model_quality.shape != (self.n_models,):
            raise SimulatorError("model_quality must have n_models entries")
        if self.cluster_difficulty.shape != (self.k_true,):
            raise SimulatorError("cluster_difficulty must have k_true entries")
        if not (0.0 <= self.clean_fraction < 1.0 or self.clean_fraction == 1.0):
            raise SimulatorError("clean_fraction must be in [0, 1]")
        if not (0.0 <= self.clean_component_bias <= 1.0):
            raise SimulatorError("clean_component_bias must be in [0, 1]")
        if self.component_means is None:
            self.component_means = well_separated_means(
                self.k_true, self.dim, self.component_spacing
            )
        else:
            self.component_means = np.asarray(self.component_means, dtype=np.float64)
        if self.component_means.shape != (self.k_true, self.dim):
            raise SimulatorError("component_means must be (k_true, dim)")

    def separation(self) -> float:
        """Minimum pairwise mean distance divided by the component std."""
        if self.k_true < 2:
            return float("inf")
        diffs = self.component_means[:, None, :] - self.component_means[None, :, :]
        dists = np.sqrt((diffs**2).sum(axis=2))
        off = dists[~np.eye(self.k_true, dtype=bool)]
        return float(off.min() / self.component_std)


def default_workload_spec(seed: int = 0, **overrides) -> WorkloadSpec:
    """Desk-scale default: 20K clips, 32 dims, 8 components, 28 models,
    10-of-11 clean dilution."""
    params = dict(
        n_clips=20_000,
        dim=32,
        k_true=8,
        n_models=28,
        model_quality=np.linspace(0.0, 0.4, 28),
        cluster_difficulty=np.linspace(-0.4, 0.3, 8),
        component_std=0.25,
        component_spacing=3.0,
        noise_std=0.5,
        clean_fraction=10.0 / 11.0,
        clean_component_bias=0.7,
        seed=seed,
    )
    params.update(overrides)
    return WorkloadSpec(**params)


def _clamp_mos(value: float) -> float:
    return min(5.0, max(1.0, value))


def generate_workload(spec: WorkloadSpec) -> ClipCollection:
    """Build a ClipCollection from the spec; see the module docstring for
    the generative model. Deterministic by spec.seed."""
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n_clips, spec.k_true

    n_clean = int(round(spec.clean_fraction * n))
    clean = np.zeros(n, dtype=bool)
    clean[rng.permutation(n)[:n_clean]] = True

    components = rng.integers(0, k, size=n)
    if n_clean and spec.clean_component_bias > 0:
        homed = rng.random(n) < spec.clean_component_bias
        components[clean & homed] = 0

    embeddings = (
        spec.component_means[components]
        + rng.normal(0.0, spec.component_std, size=(n, spec.dim))
    ).astype(np.float32)

    # one draw per (clip, model); channels share it up to configured offsets
    base_dmos = (
        spec.model_quality[None, :]
        + spec.cluster_difficulty[components][:, None]
        + rng.normal(0.0, spec.noise_std, size=(n, spec.n_models))
    )
    clean_dmos = rng.uniform(-_CLEAN_DMOS_LIMIT, _CLEAN_DMOS_LIMIT, size=(n, spec.n_models))
    base_dmos[clean] = clean_dmos[clean]

    model_ids = [f"model-{j:02d}" for j in range(spec.n_models)]
    width = len(str(max(n - 1, 1)))
    records: list[ClipRecord] = []
    clamped = 0
    for i in range(n):
        scores: dict[str, MosPair] = {}
        for j, model_id in enumerate(model_ids):
            after_vals = []
            for offset in spec.channel_offsets:
                target = _BEFORE_MOS + base_dmos[i, j] + (0.0 if clean[i] else offset)
                after = _clamp_mos(target)
                if after != target:
                    clamped += 1
                after_vals.append(after)
            before = MosTriple(_BEFORE_MOS, _BEFORE_MOS, _BEFORE_MOS)
            scores[model_id] = MosPair(before=before, after=MosTriple(*after_vals))
        records.append(
            ClipRecord(
                clip_id=f"clip-{i:0{width}d}",
                embedding=embeddings[i],
                noise_label=f"component-{components[i]}",
                scores=scores,
            )
        )
    if clamped:
        log.warning("clamped %d MOS cells into [1, 5] during generation", clamped)
    return ClipCollection(dim=spec.dim, records=records, model_ids=model_ids)


@dataclass
class StrategyResult:
    strategy: str
    budget: int
    fidelity: RankingFidelity
    diversity: DiversityReport
    ood: Optional[OodReport]
    mean_dmos: dict


@dataclass
class ExperimentReport:
    rows: list[StrategyResult]
    k: int
    rounds: int
    seed: int
    channel: str

    def row(self, strategy: str, budget: int) -> StrategyResult:
        for r in self.rows:
            if r.strategy == strategy and r.budget == budget:
                return r
        raise KeyError((strategy, budget))


def run_experiment(collection: ClipCollection, strategies: Sequence[str],
                   budgets: Sequence[int], rounds: int, *,
                   cluster_model: Optional[ClusterModel] = None,
                   k_grid: Sequence[int] = (4, 6, 8, 10),
                   seed: int = 0, channel: str = "ovrl",
                   epsilon: float = 0.05,
                   baseline_labels: Optional[Sequence[str]] = None,
                   restarts: int = 2) -> ExperimentReport:
    """Strategy-by-budget comparison: bootstrap SRCC, chi-square of pooled
    cluster counts, OOD fraction, and mean DMOS per cell."""
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        raise SimulatorError(f"unknown strategies {unknown}; valid: {STRATEGIES}")
    if cluster_model is None:
        cluster_model = select_k(
            collection.embeddings.astype(np.float64), k_grid, seed, restarts=restarts
        )

    rows: list[StrategyResult] = []
    for strategy in strategies:
        mode = _STRATEGY_MODE[strategy]
        for budget in budgets:
            config = SamplingConfig(budget=budget, mode=mode, channel=channel,
                                    seed=seed, epsilon=epsilon)
            fidelity = bootstrap_srcc(collection, cluster_model, config, rounds=rounds)
            pooled = np.zeros(cluster_model.k, dtype=np.int64)
            for r in range(rounds):
                sample = draw_sample(collection, cluster_model, config_for_round(config, r))
                pooled += sample_cluster_counts(sample, collection, cluster_model)
            representative = draw_sample(collection, cluster_model, config)
            ood = None
            if baseline_labels is not None:
                ood = ood_fraction(representative, collection, baseline_labels)
            rows.append(StrategyResult(
                strategy=strategy,
                budget=budget,
                fidelity=fidelity,
                diversity=chi_square_uniformity(pooled),
                ood=ood,
                mean_dmos=mean_dmos(representative, collection),
            ))
    return ExperimentReport(rows=rows, k=cluster_model.k, rounds=rounds,
                            seed=seed, channel=channel)
