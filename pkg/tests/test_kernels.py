import numpy as np
import pytest

from aura.kernels import BACKEND, _lloyd_np

try:
    from aura.kernels import _lloyd_cy
except ImportError:
    _lloyd_cy = None

BACKENDS = [("numpy", _lloyd_np)] + ([("cython", _lloyd_cy)] if _lloyd_cy else [])


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_assign_nearest_matches_brute_force(name, impl):
    rng = np.random.default_rng(3)
    points = rng.normal(size=(200, 7))
    centroids = rng.normal(size=(9, 7))
    labels, sqdist = impl.assign_nearest(points, centroids)
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    np.testing.assert_array_equal(labels, d2.argmin(axis=1))
    np.testing.assert_allclose(sqdist, d2.min(axis=1), rtol=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_assign_tie_breaks_to_lowest_index(name, impl):
    points = np.array([[0.0, 0.0]])
    centroids = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    labels, _ = impl.assign_nearest(points, centroids)
    assert labels[0] == 0


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_centroid_update_sums_and_counts(name, impl):
    rng = np.random.default_rng(5)
    points = rng.normal(size=(50, 3))
    labels = rng.integers(0, 4, size=50)
    sums, counts = impl.centroid_update(points, labels, 4)
    for c in range(4):
        np.testing.assert_allclose(sums[c], points[labels == c].sum(axis=0), atol=1e-12)
        assert counts[c] == (labels == c).sum()


@pytest.mark.skipif(_lloyd_cy is None, reason="compiled extension not built")
def test_backends_agree():
    rng = np.random.default_rng(11)
    points = rng.normal(size=(300, 16))
    centroids = rng.normal(size=(12, 16))
    l1, d1 = _lloyd_np.assign_nearest(points, centroids)
    l2, d2 = _lloyd_cy.assign_nearest(points, centroids)
    np.testing.assert_array_equal(l1, l2)
    np.testing.assert_allclose(d1, d2, rtol=1e-12)
    s1, c1 = _lloyd_np.centroid_update(points, l1, 12)
    s2, c2 = _lloyd_cy.centroid_update(points, l2, 12)
    np.testing.assert_allclose(s1, s2, rtol=1e-12)
    np.testing.assert_array_equal(c1, c2)


def test_selected_backend_reported():
    assert BACKEND in ("numpy", "cython")
