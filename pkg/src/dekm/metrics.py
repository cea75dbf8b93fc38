"""Clustering evaluation: NMI, accuracy under the best Hungarian label
mapping, and the entropy diagnostics used to motivate the greedy update.

All entropies use natural logarithms.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigurationError, DimensionError, NumericError


def _as_labels(v) -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1:
        raise DimensionError(f"label vector must be 1-D, got shape {a.shape}")
    return a.astype(int)


def _check_pair(g, c) -> tuple[np.ndarray, np.ndarray]:
    g, c = _as_labels(g), _as_labels(c)
    if len(g) != len(c):
        raise DimensionError(f"label lengths differ: {len(g)} vs {len(c)}")
    if len(g) == 0:
        raise ConfigurationError("empty label vectors")
    return g, c


def contingency(g: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Joint count matrix, rows indexed by distinct g labels, cols by c."""
    _, gi = np.unique(g, return_inverse=True)
    _, ci = np.unique(c, return_inverse=True)
    table = np.zeros((gi.max() + 1, ci.max() + 1), dtype=np.int64)
    np.add.at(table, (gi, ci), 1)
    return table


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def nmi(g, c) -> float:
    """2 I(G;C) / (H(G) + H(C)) from the empirical joint distribution.

    Both partitions trivial (single cluster each) is defined as 1.
    """
    g, c = _check_pair(g, c)
    joint = contingency(g, c) / len(g)
    pg = joint.sum(axis=1)
    pc = joint.sum(axis=0)
    hg, hc = _entropy(pg), _entropy(pc)
    if hg + hc == 0.0:
        return 1.0
    outer = pg[:, None] * pc[None, :]
    mask = joint > 0
    mi = float(np.sum(joint[mask] * np.log(joint[mask] / outer[mask])))
    return 2.0 * mi / (hg + hc)


def hungarian(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimal-cost perfect matching. Rectangular inputs are padded square
    with zeros. Returns (column index per row, total cost over the original
    entries)."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise DimensionError(f"cost must be 2-D, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise NumericError("cost matrix contains non-finite entries")
    r, c = cost.shape
    size = max(r, c)
    padded = np.zeros((size, size))
    padded[:r, :c] = cost
    rows, cols = linear_sum_assignment(padded)
    assignment = np.array([cols[np.where(rows == i)[0][0]] for i in range(size)])
    total = float(sum(cost[i, assignment[i]] for i in range(r) if assignment[i] < c))
    return assignment, total


def acc(g, c) -> float:
    """Clustering accuracy: matched fraction under the best one-to-one
    mapping between cluster labels and ground-truth labels."""
    g, c = _check_pair(g, c)
    table = contingency(g, c)  # rows g, cols c
    assignment, _ = hungarian(-table.astype(np.float64).T)  # maximize matches
    matched = sum(
        table[assignment[j], j]
        for j in range(table.shape[1])
        if assignment[j] < table.shape[0]
    )
    return float(matched) / len(g)


def align_labels(reference, labels) -> np.ndarray:
    """Relabel ``labels`` by the Hungarian matching that maximizes agreement
    with ``reference``. Unmatched cluster labels keep fresh indices past the
    reference range."""
    reference, labels = _check_pair(reference, labels)
    ref_vals, ri = np.unique(reference, return_inverse=True)
    lab_vals, li = np.unique(labels, return_inverse=True)
    table = np.zeros((len(ref_vals), len(lab_vals)), dtype=np.int64)
    np.add.at(table, (ri, li), 1)
    assignment, _ = hungarian(-table.astype(np.float64).T)
    out_map = np.empty(len(lab_vals), dtype=ref_vals.dtype)
    next_fresh = ref_vals.max() + 1
    for j in range(len(lab_vals)):
        if assignment[j] < len(ref_vals):
            out_map[j] = ref_vals[assignment[j]]
        else:
            out_map[j] = next_fresh
            next_fresh += 1
    return out_map[li]


def gaussian_entropy(variances) -> float:
    """Differential entropy of an axis-aligned Gaussian,
    (1/2) ln(2 pi e * prod of variances)."""
    v = np.asarray(variances, dtype=np.float64)
    if v.size == 0 or np.any(v <= 0):
        raise ConfigurationError(f"variances must be positive, got {variances}")
    return float(0.5 * np.log(2.0 * np.pi * np.e * np.prod(v)))


def uniform_entropy(n: int) -> float:
    """Entropy of a uniform distribution over n outcomes, ln(n)."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    return float(np.log(n))
