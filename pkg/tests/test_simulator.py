import numpy as np
import pytest

from aura.dataset import dmos_matrix
from aura.metrics import MetricError, rank_models
from aura.simulator import (
    SimulatorError,
    WorkloadSpec,
    default_workload_spec,
    generate_workload,
    run_experiment,
    well_separated_means,
)


def small_spec(**overrides):
    params = dict(
        n_clips=300,
        dim=8,
        k_true=4,
        n_models=5,
        model_quality=np.linspace(0.1, 0.5, 5),
        cluster_difficulty=np.array([-0.3, -0.1, 0.1, 0.3]),
        noise_std=0.05,
        clean_fraction=0.0,
        seed=7,
    )
    params.update(overrides)
    return WorkloadSpec(**params)


def test_spec_validation():
    with pytest.raises(SimulatorError):
        small_spec(model_quality=np.zeros(3))
    with pytest.raises(SimulatorError):
        small_spec(cluster_difficulty=np.zeros(2))
    with pytest.raises(SimulatorError):
        small_spec(k_true=0, cluster_difficulty=np.zeros(0))


def test_well_separated_means_distance():
    means = well_separated_means(4, 8, 3.0)
    diffs = means[:, None, :] - means[None, :, :]
    dists = np.sqrt((diffs**2).sum(axis=2))
    off = dists[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, 3.0 * np.sqrt(2))


def test_separation_reported():
    spec = small_spec(component_std=0.3, component_spacing=3.0)
    assert spec.separation() == pytest.approx(3.0 * np.sqrt(2) / 0.3)


def test_generation_deterministic():
    a = generate_workload(small_spec())
    b = generate_workload(small_spec())
    np.testing.assert_array_equal(a.embeddings, b.embeddings)
    for r1, r2 in zip(a.records, b.records):
        assert r1.clip_id == r2.clip_id
        assert r1.noise_label == r2.noise_label
        assert r1.scores == r2.scores


def test_zero_noise_recovers_planted_ranking():
    spec = small_spec(noise_std=0.0)
    col = generate_workload(spec)
    for channel in ("sig", "bak", "ovrl"):
        ranking = rank_models(col, channel)
        # higher planted quality -> higher mean DMOS -> better (lower) rank
        planted_order = np.argsort(-spec.model_quality)
        observed_order = np.argsort(ranking.ranks)
        np.testing.assert_array_equal(observed_order, planted_order)


def test_all_clean_gives_near_zero_means():
    col = generate_workload(small_spec(clean_fraction=1.0))
    mat = dmos_matrix(col, "ovrl")
    assert np.abs(mat).max() <= 0.01
    assert np.abs(mat.mean(axis=0)).max() <= 0.005


def test_noise_labels_follow_components():
    col = generate_workload(small_spec())
    labels = {r.noise_label for r in col.records}
    assert labels <= {f"component-{c}" for c in range(4)}


def test_clean_bias_concentrates_component_zero():
    spec = small_spec(n_clips=2000, clean_fraction=0.9, clean_component_bias=1.0)
    col = generate_workload(spec)
    mat = dmos_matrix(col, "ovrl")
    clean = np.abs(mat).max(axis=1) <= 0.01
    labels = np.array([r.noise_label for r in col.records])
    assert (labels[clean] == "component-0").mean() == 1.0


def test_run_experiment_full_budget_is_perfect():
    col = generate_workload(small_spec(noise_std=0.2))
    report = run_experiment(
        col, ["random", "aura"], [len(col)], rounds=5, k_grid=[4], seed=1
    )
    for row in report.rows:
        assert row.fidelity.srcc_mean == 1.0
        assert row.fidelity.srcc_std == 0.0


def test_run_experiment_diversity_covers_clusters():
    col = generate_workload(small_spec(n_clips=800, noise_std=0.2))
    report = run_experiment(
        col, ["diversity"], [80], rounds=10, k_grid=[4], seed=3
    )
    row = report.row("diversity", 80)
    assert row.diversity.p_value >= 0.2


def test_run_experiment_rejects_unknown_strategy():
    col = generate_workload(small_spec())
    with pytest.raises(SimulatorError):
        run_experiment(col, ["bogus"], [10], rounds=2, k_grid=[4], seed=0)


def test_run_experiment_reports_ood():
    col = generate_workload(small_spec(n_clips=400, noise_std=0.2))
    report = run_experiment(
        col, ["random"], [40], rounds=4, k_grid=[4], seed=2,
        baseline_labels=["component-0", "component-1"],
    )
    row = report.row("random", 40)
    assert row.ood is not None
    assert 0.0 <= row.ood.fraction <= 1.0
    assert row.mean_dmos["ovrl"].count == 40 * 5


def test_default_spec_shape():
    spec = default_workload_spec(seed=1)
    assert spec.n_clips == 20_000
    assert spec.dim == 32
    assert spec.k_true == 8
    assert spec.n_models == 28
    assert spec.clean_fraction == pytest.approx(10 / 11)
