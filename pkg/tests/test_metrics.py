import numpy as np
import pytest

from dekm import metrics
from dekm.errors import ConfigurationError, DimensionError, NumericError

from conftest import brute_force_acc, brute_force_matching


def test_nmi_identical():
    assert metrics.nmi([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(1.0)


def test_nmi_relabeled():
    assert metrics.nmi([0, 0, 1, 1], [5, 5, 2, 2]) == pytest.approx(1.0)


def test_nmi_independent_partitions():
    assert metrics.nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)


def test_nmi_trivial_partitions():
    assert metrics.nmi([0, 0, 0], [1, 1, 1]) == 1.0


def test_nmi_length_mismatch():
    with pytest.raises(DimensionError):
        metrics.nmi([0, 1], [0, 1, 2])


def test_acc_identical_and_relabeled():
    assert metrics.acc([0, 1, 2], [0, 1, 2]) == 1.0
    assert metrics.acc([0, 1, 2], [2, 0, 1]) == 1.0


def test_acc_matches_brute_force(rng):
    for _ in range(100):
        n = int(rng.integers(4, 30))
        kg = int(rng.integers(1, 7))
        kc = int(rng.integers(1, 7))
        g = rng.integers(kg, size=n)
        c = rng.integers(kc, size=n)
        assert metrics.acc(g, c) == pytest.approx(brute_force_acc(g, c), abs=1e-12)


def test_metric_ranges_fuzz(rng):
    for _ in range(50):
        n = int(rng.integers(2, 40))
        g = rng.integers(1, 6, size=1).item()
        g = rng.integers(g, size=n)
        c = rng.integers(int(rng.integers(1, 6)), size=n)
        for v in (metrics.nmi(g, c), metrics.acc(g, c)):
            assert -1e-12 <= v <= 1.0 + 1e-12


def test_acc_pigeonhole_on_balanced_classes(rng):
    for _ in range(20):
        k = int(rng.integers(2, 5))
        g = np.repeat(np.arange(k), 10)
        c = rng.integers(k, size=len(g))
        assert metrics.acc(g, c) >= 1.0 / k - 1e-12


def test_hungarian_diagonal():
    cost = np.full((3, 3), 5.0) - 4.0 * np.eye(3)
    assignment, total = metrics.hungarian(cost)
    assert np.array_equal(assignment, [0, 1, 2])
    assert total == pytest.approx(3.0)


def test_hungarian_two_by_two():
    assignment, total = metrics.hungarian(np.array([[4.0, 1.0], [2.0, 3.0]]))
    assert np.array_equal(assignment, [1, 0])
    assert total == pytest.approx(3.0)


def test_hungarian_matches_brute_force(rng):
    for _ in range(100):
        k = int(rng.integers(2, 8))
        cost = rng.uniform(0, 10, size=(k, k))
        _, total = metrics.hungarian(cost)
        best_total, _ = brute_force_matching(cost)
        assert total == pytest.approx(best_total, abs=1e-9)


def test_hungarian_rejects_nonfinite():
    with pytest.raises(NumericError):
        metrics.hungarian(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_align_labels_counts_real_changes():
    prev = np.array([0, 0, 1, 1, 2, 2])
    cur = np.array([2, 2, 0, 0, 1, 1])  # pure relabeling
    assert np.array_equal(metrics.align_labels(prev, cur), prev)
    cur2 = np.array([2, 1, 0, 0, 1, 1])  # one genuine move
    assert int(np.sum(metrics.align_labels(prev, cur2) != prev)) == 1


def test_gaussian_entropy_golden_values():
    assert metrics.gaussian_entropy([1.0, 1.0]) == pytest.approx(1.419, abs=1e-3)
    assert metrics.gaussian_entropy([0.25, 0.25]) == pytest.approx(0.033, abs=1e-3)
    # product 1/(2 pi e) makes the log argument 1
    assert metrics.gaussian_entropy([1.0 / (2.0 * np.pi * np.e)]) == pytest.approx(0.0)


def test_gaussian_entropy_rejects_nonpositive():
    with pytest.raises(ConfigurationError):
        metrics.gaussian_entropy([1.0, 0.0])


def test_uniform_entropy():
    assert metrics.uniform_entropy(1) == 0.0
    assert metrics.uniform_entropy(400) == pytest.approx(5.992, abs=1e-3)
    assert metrics.uniform_entropy(3) == pytest.approx(np.log(3.0))
    with pytest.raises(ConfigurationError):
        metrics.uniform_entropy(0)
