import numpy as np
import pytest

from dekm import kmeans as km
from dekm.errors import ConfigurationError, DimensionError
from dekm.linalg import sym_eig

from conftest import brute_force_kmeans


def lloyd_pp(h, k, seed, **kw):
    return km.lloyd(h, k, km.kmeanspp_init(h, k, seed), **kw)


def test_kmeanspp_k_equals_n_is_permutation(rng):
    h = rng.normal(size=(6, 2))
    cents = km.kmeanspp_init(h, 6, 0)
    # D^2 weighting forces distinct points
    assert {tuple(c) for c in cents} == {tuple(p) for p in h}


def test_kmeanspp_k1_picks_a_point(rng):
    h = rng.normal(size=(5, 3))
    cents = km.kmeanspp_init(h, 1, 7)
    assert any(np.array_equal(cents[0], p) for p in h)


def test_kmeanspp_rejects_k_gt_n():
    with pytest.raises(ConfigurationError):
        km.kmeanspp_init(np.zeros((2, 2)), 3, 0)


def test_kmeanspp_spreads_over_separated_pairs():
    # two tight pairs far apart; D^2 seeding should almost always take one
    # centroid from each pair
    h = np.array([[0.0, 0.0], [0.1, 0.0], [100.0, 0.0], [100.1, 0.0]])
    hits = 0
    for seed in range(1000):
        cents = km.kmeanspp_init(h, 2, seed)
        sides = {c[0] > 50.0 for c in cents}
        hits += len(sides) == 2
    assert hits >= 990


def test_lloyd_distinct_points_zero_inertia():
    h = np.array([[0.0], [5.0], [9.0]])
    res = km.lloyd(h, 3, h.copy())
    assert res.inertia == 0.0
    assert res.iterations_run <= 2


def test_lloyd_two_pairs_fixture():
    h = np.array([[0.0], [1.0], [9.0], [10.0]])
    res = lloyd_pp(h, 2, seed=3)
    assert res.inertia == pytest.approx(1.0)
    assert sorted(res.centroids.ravel()) == [0.5, 9.5]
    assert res.assignments[0] == res.assignments[1]
    assert res.assignments[2] == res.assignments[3]


def test_lloyd_empty_input():
    with pytest.raises(ConfigurationError):
        km.lloyd(np.zeros((0, 2)), 1, np.zeros((1, 2)))


def test_lloyd_inertia_never_below_brute_force(rng):
    for _ in range(20):
        n = int(rng.integers(4, 9))
        h = rng.normal(size=(n, int(rng.integers(1, 3))))
        best_inertia, _ = brute_force_kmeans(h, 2)
        res = lloyd_pp(h, 2, seed=int(rng.integers(1 << 30)))
        assert res.inertia >= best_inertia - 1e-9


def test_lloyd_from_oracle_optimum_stays_optimal(rng):
    for _ in range(20):
        n = int(rng.integers(4, 9))
        h = rng.normal(size=(n, 2))
        best_inertia, best_assign = brute_force_kmeans(h, 2)
        init = np.stack([h[best_assign == j].mean(axis=0) for j in range(2)])
        res = km.lloyd(h, 2, init)
        assert res.inertia == pytest.approx(best_inertia, abs=1e-9)


def test_lloyd_inertia_monotone(rng):
    for _ in range(10):
        h = rng.normal(size=(60, 3))
        res = lloyd_pp(h, 4, seed=int(rng.integers(1 << 30)))
        assert all(b <= a + 1e-9 for a, b in zip(res.inertia_trace, res.inertia_trace[1:]))


def test_lloyd_centroids_are_member_means(rng):
    h = rng.normal(size=(40, 2))
    res = lloyd_pp(h, 3, seed=0)
    for j in range(3):
        members = h[res.assignments == j]
        assert len(members) > 0
        assert np.max(np.abs(res.centroids[j] - members.mean(axis=0))) < 1e-9


def test_empty_cluster_repair():
    # centroids placed so one starts empty
    h = np.array([[0.0], [0.1], [0.2], [10.0]])
    init = np.array([[0.05], [0.15], [100.0]])
    res = km.lloyd(h, 3, init)
    assert set(res.assignments.tolist()) == {0, 1, 2}


def test_within_class_scatter_zero_when_points_are_centroids():
    h = np.array([[1.0, 2.0], [3.0, 4.0]])
    res = km.lloyd(h, 2, h.copy())
    assert np.array_equal(km.within_class_scatter(h, res), np.zeros((2, 2)))


def test_within_class_scatter_hand_value():
    h = np.array([[0.0], [1.0], [9.0], [10.0]])
    res = lloyd_pp(h, 2, seed=0)
    sw = km.within_class_scatter(h, res)
    assert sw == pytest.approx(np.array([[1.0]]))


def test_scatter_trace_equals_inertia(rng):
    for _ in range(20):
        h = rng.normal(size=(30, 4)) * rng.uniform(0.5, 5)
        res = lloyd_pp(h, 3, seed=int(rng.integers(1 << 30)))
        sw = km.within_class_scatter(h, res)
        assert np.trace(sw) == pytest.approx(res.inertia, abs=1e-9)
        # S_w is symmetric PSD
        assert np.array_equal(sw, sw.T)
        assert np.min(sym_eig(sw).eigenvalues) >= -1e-10


def test_scatter_rejects_inconsistent_result(rng):
    h = rng.normal(size=(10, 2))
    res = lloyd_pp(h, 2, seed=0)
    with pytest.raises(DimensionError):
        km.within_class_scatter(h[:5], res)


def test_transform_invariance(rng):
    # inertia is invariant under the orthonormal transform from sym_eig
    for _ in range(10):
        h = rng.normal(size=(25, 5))
        res = lloyd_pp(h, 3, seed=int(rng.integers(1 << 30)))
        v = sym_eig(km.within_class_scatter(h, res)).v
        y = h @ v.T
        my = res.centroids @ v.T
        inertia_y = float(np.sum((y - my[res.assignments]) ** 2))
        assert inertia_y == pytest.approx(res.inertia, abs=1e-8)
