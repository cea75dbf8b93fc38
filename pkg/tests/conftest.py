"""Shared oracles: independent brute-force / finite-difference references
the fast paths are checked against."""

import itertools

import numpy as np
import pytest


def relu_pattern(model, x, encoder_only=False):
    """Concatenated ReLU on/off masks for the network at input x. Used to
    detect finite-difference steps that cross an activation kink, where the
    loss is not differentiable and central differences are meaningless."""
    masks = []
    a = np.asarray(x, dtype=np.float64)
    chains = [(model.enc_w, model.enc_b)]
    if not encoder_only:
        chains.append((model.dec_w, model.dec_b))
    for ws, bs in chains:
        for i, (w, b) in enumerate(zip(ws, bs)):
            z = a @ w + b
            if i < len(ws) - 1:
                masks.append((z > 0.0).ravel())
                a = np.maximum(z, 0.0)
            else:
                a = z
    return np.concatenate(masks) if masks else np.zeros(0, dtype=bool)


def finite_difference_grads(loss_fn, params, step=1e-5, pattern_fn=None):
    """Central finite differences of loss_fn() w.r.t. each entry of each
    array in params (perturbed in place). Entries whose perturbation flips
    the pattern_fn() snapshot (a ReLU kink crossing) come back as NaN."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p[i]
            p[i] = old + step
            lp = loss_fn()
            pat_p = pattern_fn() if pattern_fn else None
            p[i] = old - step
            lm = loss_fn()
            pat_m = pattern_fn() if pattern_fn else None
            p[i] = old
            if pattern_fn is not None and not np.array_equal(pat_p, pat_m):
                g[i] = np.nan
            else:
                g[i] = (lp - lm) / (2.0 * step)
        grads.append(g)
    return grads


def max_gradient_rel_error(analytic, numeric, loss_value):
    """Worst per-entry relative error between two gradient sets, ignoring
    NaN entries in the numeric set (kink crossings).

    The denominator is floored at 1e-5 * (1 + |loss|): central differences
    of a float64 loss carry cancellation noise of order eps * loss / step,
    so entries far below that scale cannot be compared relatively.
    """
    floor = 1e-5 * (1.0 + abs(loss_value))
    worst = 0.0
    for a, n in zip(analytic, numeric):
        valid = np.isfinite(n)
        if not np.any(valid):
            continue
        a, n = a[valid], n[valid]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def brute_force_kmeans(h, k):
    """Globally optimal k-means objective by enumerating all assignments
    with no empty cluster. Only viable for tiny n."""
    n = h.shape[0]
    best = (np.inf, None)
    for assign in itertools.product(range(k), repeat=n):
        assign = np.array(assign)
        if len(np.unique(assign)) < k:
            continue
        inertia = 0.0
        for j in range(k):
            members = h[assign == j]
            inertia += float(np.sum((members - members.mean(axis=0)) ** 2))
        if inertia < best[0]:
            best = (inertia, assign)
    return best


def brute_force_acc(g, c):
    """Best label-mapping accuracy by enumerating all permutations."""
    g = np.asarray(g)
    c = np.asarray(c)
    g_vals = np.unique(g)
    c_vals = np.unique(c)
    size = max(len(g_vals), len(c_vals))
    best = 0
    for perm in itertools.permutations(range(size)):
        matched = 0
        for j, cv in enumerate(c_vals):
            if perm[j] < len(g_vals):
                matched += int(np.sum((c == cv) & (g == g_vals[perm[j]])))
        best = max(best, matched)
    return best / len(g)


def brute_force_matching(cost):
    """Minimal-cost perfect matching by enumerating all permutations."""
    k = cost.shape[0]
    best = (np.inf, None)
    for perm in itertools.permutations(range(k)):
        total = sum(cost[i, perm[i]] for i in range(k))
        if total < best[0]:
            best = (total, perm)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
