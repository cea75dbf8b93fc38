"""Lloyd's K-means with k-means++ seeding and the within-class scatter
matrix of a clustering.

Determinism rules: distance ties go to the lowest cluster index; an empty
cluster is repaired by moving the point currently farthest from its own
centroid into it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError


@dataclass
class ClusterResult:
    assignments: np.ndarray  # (n,) int cluster indices
    centroids: np.ndarray  # (k, e)
    inertia: float  # sum of squared distances to assigned centroids
    iterations_run: int
    inertia_trace: list[float] = field(default_factory=list)


def _sq_dists(h: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) squared euclidean distances."""
    # ||h||^2 - 2 h.c + ||c||^2, clipped against tiny negative round-off
    d = (
        np.sum(h * h, axis=1)[:, None]
        - 2.0 * h @ centroids.T
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def kmeanspp_init(h: np.ndarray, k: int, seed) -> np.ndarray:
    """D^2-weighted seeding: first centroid uniform, each next proportional
    to squared distance from the nearest chosen one. ``seed`` may be an int
    or a numpy Generator."""
    h = np.asarray(h, dtype=np.float64)
    n = h.shape[0]
    if k < 1 or k > n:
        raise ConfigurationError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    chosen = np.empty(k, dtype=int)
    chosen[0] = rng.integers(n)
    d2 = _sq_dists(h, h[chosen[:1]])[:, 0]
    for i in range(1, k):
        total = d2.sum()
        if total > 0.0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))  # all mass on chosen points (duplicates)
        chosen[i] = idx
        d2 = np.minimum(d2, _sq_dists(h, h[idx : idx + 1])[:, 0])
    return h[chosen].copy()


def _assign(h: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return np.argmin(_sq_dists(h, centroids), axis=1)  # argmin takes lowest index on ties


def _repair_empty(h, assignments, centroids, k):
    """Move the globally farthest-from-its-centroid point into each empty
    cluster."""
    for j in range(k):
        if np.any(assignments == j):
            continue
        dist = np.sum((h - centroids[assignments]) ** 2, axis=1)
        # never steal a singleton, that would just move the hole
        counts = np.bincount(assignments, minlength=k)
        dist[counts[assignments] <= 1] = -1.0
        donor = int(np.argmax(dist))
        assignments[donor] = j
        centroids[j] = h[donor]
    return assignments, centroids


def _means(h, assignments, k, fallback):
    centroids = fallback.copy()
    for j in range(k):
        mask = assignments == j
        if mask.any():
            centroids[j] = h[mask].mean(axis=0)
    return centroids


def lloyd(
    h: np.ndarray,
    k: int,
    init_centroids: np.ndarray,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterResult:
    """Alternate nearest-centroid assignment and mean updates until the
    assignments stabilize, the relative inertia improvement drops below
    ``tol``, or ``max_iter`` is hit."""
    h = np.asarray(h, dtype=np.float64)
    if h.size == 0:
        raise ConfigurationError("empty input")
    init_centroids = np.asarray(init_centroids, dtype=np.float64)
    if init_centroids.shape != (k, h.shape[1]):
        raise DimensionError(
            f"init centroids shape {init_centroids.shape} != ({k}, {h.shape[1]})"
        )
    if max_iter < 1:
        raise ConfigurationError(f"max_iter must be >= 1, got {max_iter}")

    centroids = init_centroids.copy()
    assignments = None
    trace: list[float] = []
    prev_inertia = np.inf
    iterations = 0
    for _ in range(max_iter):
        new_assign = _assign(h, centroids)
        new_assign, centroids = _repair_empty(h, new_assign, centroids, k)
        centroids = _means(h, new_assign, k, centroids)
        inertia = float(np.sum((h - centroids[new_assign]) ** 2))
        iterations += 1
        trace.append(inertia)
        stable = assignments is not None and np.array_equal(new_assign, assignments)
        assignments = new_assign
        if stable:
            break
        if np.isfinite(prev_inertia) and prev_inertia - inertia <= tol * max(prev_inertia, 1e-300):
            break
        prev_inertia = inertia
    return ClusterResult(
        assignments=assignments,
        centroids=centroids,
        inertia=trace[-1],
        iterations_run=iterations,
        inertia_trace=trace,
    )


def within_class_scatter(h: np.ndarray, r: ClusterResult) -> np.ndarray:
    """S_w = sum over clusters of (h - mu)(h - mu)^T; trace equals inertia."""
    h = np.asarray(h, dtype=np.float64)
    if len(r.assignments) != h.shape[0]:
        raise DimensionError(
            f"{len(r.assignments)} assignments for {h.shape[0]} samples"
        )
    centered = h - r.centroids[r.assignments]
    sw = centered.T @ centered
    return 0.5 * (sw + sw.T)
