import math

import numpy as np
import pytest

from aura.metrics import (
    MetricError,
    bootstrap_srcc,
    chi_square_uniformity,
    mean_dmos,
    ood_fraction,
    rank_models,
    sample_cluster_counts,
    srcc,
    top_categories,
)
from aura.sampling import SampleEntry, SampleManifest, SamplingConfig

from conftest import make_collection
from test_sampling import cluster_model_for


def manifest_for(clip_ids, mode="random", budget=None, seed=0):
    entries = [SampleEntry(clip_id=c, cluster_index=-1, weight=1.0) for c in clip_ids]
    cfg = SamplingConfig(budget=budget or len(clip_ids), mode=mode, seed=seed)
    return SampleManifest(entries=entries, config=cfg, strategy_name=mode)


class TestSrcc:
    def test_identical_orderings(self):
        assert srcc([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0

    def test_reversed_orderings(self):
        assert srcc([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0

    def test_hand_case(self):
        # d = (1, -1, 1, -1, 0), sum d^2 = 4: 1 - 6*4/(5*24) = 0.8
        assert srcc([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8)

    def test_constant_vector_rejected(self):
        with pytest.raises(MetricError, match="constant"):
            srcc([1, 1, 1], [1, 2, 3])

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = rng.normal(size=(2, 6))
            assert srcc(a, b) == pytest.approx(srcc(b, a), abs=1e-15)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b = rng.normal(size=(2, 7))
            assert srcc(np.exp(a), b) == pytest.approx(srcc(a, b), abs=1e-12)
            assert srcc(a, 3 * b + 1) == pytest.approx(srcc(a, b), abs=1e-12)

    def test_tie_free_matches_closed_form(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(3, 9))
            a = rng.permutation(n).astype(float)
            b = rng.permutation(n).astype(float)
            d2 = ((a - b) ** 2).sum()
            closed = 1 - 6 * d2 / (n * (n**2 - 1))
            assert srcc(a, b) == pytest.approx(closed, abs=1e-12)


class TestChiSquare:
    def test_uniform_counts(self):
        report = chi_square_uniformity([10, 10, 10, 10])
        assert report.chi2 == 0.0
        assert report.p_value == 1.0

    def test_hand_case_75_25(self):
        report = chi_square_uniformity([75, 25])
        assert report.chi2 == pytest.approx(25.0)
        assert 0 < report.p_value < 1e-5

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        counts = rng.integers(1, 50, size=6)
        base = chi_square_uniformity(counts).chi2
        for factor in (2, 7, 100):
            scaled = chi_square_uniformity(counts * factor).chi2
            assert scaled == pytest.approx(base, rel=1e-12)

    def test_zero_iff_equal(self):
        assert chi_square_uniformity([7, 7, 7]).chi2 == 0.0
        assert chi_square_uniformity([7, 8, 7]).chi2 > 0.0

    def test_all_zero_rejected(self):
        with pytest.raises(MetricError):
            chi_square_uniformity([0, 0, 0])


class TestRankModels:
    def test_two_models_single_clip(self):
        col = make_collection({"a": {"m1": 0.5, "m2": 0.1}})
        ranking = rank_models(col, "ovrl")
        assert list(ranking.ranks) == [1.0, 2.0]

    def test_tied_means_get_average_rank(self):
        col = make_collection({"a": {"m1": 0.3, "m2": 0.3}})
        ranking = rank_models(col, "ovrl")
        assert list(ranking.ranks) == [1.5, 1.5]

    def test_hand_table(self):
        table = {
            "a": {"m1": 0.1, "m2": 0.6, "m3": -0.2},
            "b": {"m1": 0.4, "m2": 0.0, "m3": -0.1},
            "c": {"m1": 0.1, "m2": 0.3, "m3": 0.6},
        }
        col = make_collection(table)
        ranking = rank_models(col, "ovrl")
        means = {
            m: sum(table[c][m] for c in table) / 3 for m in ("m1", "m2", "m3")
        }
        for j, m in enumerate(ranking.model_ids):
            assert ranking.mean_dmos[j] == pytest.approx(means[m])
        assert list(ranking.ranks) == [2.0, 1.0, 3.0]

    def test_invariant_to_clip_order(self):
        table = {"a": {"m1": 0.2, "m2": 0.5}, "b": {"m1": 0.7, "m2": -0.3}}
        col1 = make_collection(table)
        col2 = make_collection(dict(reversed(table.items())))
        r1 = rank_models(col1, "ovrl")
        r2 = rank_models(col2, "ovrl")
        np.testing.assert_allclose(sorted(r1.mean_dmos), sorted(r2.mean_dmos))
        assert dict(zip(r1.model_ids, r1.ranks)) == dict(zip(r2.model_ids, r2.ranks))

    def test_on_sample_subset(self):
        col = make_collection({
            "a": {"m1": 1.0, "m2": 0.0},
            "b": {"m1": 0.0, "m2": 1.0},
            "c": {"m1": 1.0, "m2": 0.0},
        })
        ranking = rank_models(col, "ovrl", manifest_for(["a", "c"]))
        assert list(ranking.ranks) == [1.0, 2.0]


class TestBootstrap:
    def test_full_budget_collapses_to_one(self):
        rng = np.random.default_rng(5)
        col = make_collection({
            f"c{i}": {"m1": float(rng.normal()), "m2": float(rng.normal())}
            for i in range(12)
        })
        cfg = SamplingConfig(budget=12, mode="random", seed=3)
        fid = bootstrap_srcc(col, None, cfg, rounds=10)
        assert fid.srcc_mean == 1.0
        assert fid.srcc_std == 0.0
        assert fid.ci95_low == fid.ci95_high == 1.0

    def test_ci_brackets_mean(self):
        rng = np.random.default_rng(6)
        col = make_collection({
            f"c{i}": {f"m{j}": float(rng.normal()) for j in range(4)}
            for i in range(30)
        })
        cfg = SamplingConfig(budget=10, mode="random", seed=1)
        fid = bootstrap_srcc(col, None, cfg, rounds=50)
        assert fid.ci95_low <= fid.srcc_mean <= fid.ci95_high
        assert fid.bootstrap_rounds == 50

    def test_rounds_validation(self):
        col = make_collection({"a": {"m1": 0.1, "m2": 0.2}})
        with pytest.raises(MetricError):
            bootstrap_srcc(col, None, SamplingConfig(budget=1, mode="random", seed=0), rounds=1)


class TestOod:
    def make_labeled(self):
        labels = {}
        spec = {}
        for i in range(11):
            cid = f"c{i:02d}"
            spec[cid] = {"m1": 0.0, "m2": 0.0}
            labels[cid] = "in-dist" if i < 3 else f"novel-{i}"
        return make_collection(spec, labels=labels)

    def test_all_in_baseline(self):
        col = self.make_labeled()
        manifest = manifest_for([f"c{i:02d}" for i in range(3)])
        report = ood_fraction(manifest, col, {"in-dist"})
        assert report.fraction == 0.0

    def test_none_in_baseline(self):
        col = self.make_labeled()
        manifest = manifest_for([f"c{i:02d}" for i in range(3, 11)])
        report = ood_fraction(manifest, col, {"in-dist"})
        assert report.fraction == 1.0

    def test_eight_of_eleven(self):
        col = self.make_labeled()
        manifest = manifest_for([f"c{i:02d}" for i in range(11)])
        report = ood_fraction(manifest, col, {"in-dist"})
        assert report.fraction == pytest.approx(8 / 11)
        assert report.n_labeled == 11
        assert report.n_unlabeled == 0

    def test_unlabeled_excluded_and_counted(self):
        spec = {"a": {"m1": 0.0}, "b": {"m1": 0.0}, "c": {"m1": 0.0}}
        col = make_collection(spec, labels={"a": "x"})
        report = ood_fraction(manifest_for(["a", "b", "c"]), col, {"x"})
        assert report.fraction == 0.0
        assert report.n_labeled == 1
        assert report.n_unlabeled == 2

    def test_empty_labeled_subset_rejected(self):
        col = make_collection({"a": {"m1": 0.0}})
        with pytest.raises(MetricError):
            ood_fraction(manifest_for(["a"]), col, {"x"})


class TestTopCategories:
    def test_single_in_baseline_category(self):
        col = make_collection({"a": {"m1": 0.0}}, labels={"a": "rain"})
        ood, ind = top_categories(manifest_for(["a"]), col, {"rain"})
        assert ood == []
        assert ind == [("rain", 1)]

    def test_tie_break_lexicographic(self):
        labels = {"c0": "b", "c1": "a", "c2": "a", "c3": "b", "c4": "c"}
        spec = {c: {"m1": 0.0} for c in labels}
        col = make_collection(spec, labels=labels)
        ood, ind = top_categories(manifest_for(list(labels)), col, set(), n=2)
        assert ood == [("a", 2), ("b", 2)]
        assert ind == []

    def test_mixed_hand_case(self):
        labels = {
            "c0": "rain", "c1": "rain", "c2": "wind",
            "c3": "typing", "c4": "typing", "c5": "typing",
            "c6": "music", "c7": "car", "c8": "car",
        }
        spec = {c: {"m1": 0.0} for c in labels}
        col = make_collection(spec, labels=labels)
        baseline = {"rain", "wind"}
        ood, ind = top_categories(manifest_for(list(labels)), col, baseline, n=10)
        assert ood == [("typing", 3), ("car", 2), ("music", 1)]
        assert ind == [("rain", 2), ("wind", 1)]


class TestMeanDmos:
    def test_single_cell(self):
        col = make_collection({"a": {"m1": (-0.2, 2.1, 0.5)}})
        stats = mean_dmos(None, col)
        assert stats["sig"].mean == pytest.approx(-0.2)
        assert stats["bak"].mean == pytest.approx(2.1)
        assert stats["ovrl"].mean == pytest.approx(0.5)
        assert stats["ovrl"].ci95_low == stats["ovrl"].ci95_high == stats["ovrl"].mean

    def test_four_values_hand_formula(self):
        vals = [0.1, 0.4, -0.2, 0.3]
        col = make_collection({f"c{i}": {"m1": v} for i, v in enumerate(vals)})
        stats = mean_dmos(None, col)
        mean = sum(vals) / 4
        sd = math.sqrt(sum((v - mean) ** 2 for v in vals) / 3)
        half = 1.96 * sd / 2
        assert stats["ovrl"].mean == pytest.approx(mean)
        assert stats["ovrl"].ci95_low == pytest.approx(mean - half)
        assert stats["ovrl"].ci95_high == pytest.approx(mean + half)
        assert stats["ovrl"].count == 4


def test_sample_cluster_counts_uses_model_assignments():
    col = make_collection({f"c{i}": {"m1": 0.0} for i in range(6)})
    model = cluster_model_for([0, 1, 1, 2, 2, 2], 3)
    manifest = manifest_for([f"c{i}" for i in (0, 2, 4, 5)])
    counts = sample_cluster_counts(manifest, col, model)
    assert counts.tolist() == [1, 1, 2]
