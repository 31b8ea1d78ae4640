"""Pure-numpy reference implementations of the hot kernels.

Semantics must match numba_impl exactly up to float summation order; the
dispatch layer compares nothing, but tests/benchmarks run both backends on
the same inputs.
"""

from __future__ import annotations

import numpy as np


def _dist_sq_matrix(points: np.ndarray, queries: np.ndarray) -> np.ndarray:
    # (M, K) squared distances, accumulated per coordinate to avoid an
    # (M, K, d) temporary
    m, k = queries.shape[0], points.shape[0]
    d2 = np.zeros((m, k))
    for j in range(queries.shape[1]):
        diff = queries[:, j, None] - points[None, :, j]
        d2 += diff * diff
    return d2


def min_dist_sq(points: np.ndarray, queries: np.ndarray) -> np.ndarray:
    return _dist_sq_matrix(points, queries).min(axis=1)


def nearest(points: np.ndarray, queries: np.ndarray):
    d2 = _dist_sq_matrix(points, queries)
    idx = d2.argmin(axis=1)  # first occurrence = smallest index on ties
    return idx.astype(np.int64), np.sqrt(d2[np.arange(len(idx)), idx])


def counts_nearest(points: np.ndarray, queries: np.ndarray) -> np.ndarray:
    idx, _ = nearest(points, queries)
    return np.bincount(idx, minlength=points.shape[0]).astype(np.int64)


def lloyd_accumulate(frozen: np.ndarray, a: np.ndarray, batch: np.ndarray):
    """Classify one sample batch against frozen points plus the moving point.

    Returns (in-cell count, in-cell coordinate sums, in-cell coordinate
    square sums, total min-squared-distance mass, index of the batch point
    farthest from the full grid).  Membership in the moving cell uses the
    closed-cell rule |x - a| <= min over frozen.
    """
    da2 = ((batch - a[None, :]) ** 2).sum(axis=1)
    if frozen.shape[0]:
        dmin2_frozen = min_dist_sq(frozen, batch)
    else:
        dmin2_frozen = np.full(batch.shape[0], np.inf)
    in_cell = da2 <= dmin2_frozen
    dmin2 = np.minimum(da2, dmin2_frozen)
    sel = batch[in_cell]
    count = int(in_cell.sum())
    sum_x = sel.sum(axis=0) if count else np.zeros(batch.shape[1])
    sum_x2 = (sel * sel).sum(axis=0) if count else np.zeros(batch.shape[1])
    return count, sum_x, sum_x2, float(dmin2.sum()), int(dmin2.argmax())


def clvq_run(
    stimuli: np.ndarray,
    dmin2_frozen: np.ndarray,
    a0: np.ndarray,
    gammas: np.ndarray,
):
    """Sequential CLVQ pass: move only on winning stimuli, average iterates."""
    a = a0.astype(float).copy()
    avg = np.zeros_like(a)
    n = stimuli.shape[0]
    for i in range(n):
        avg += a
        x = stimuli[i]
        diff = x - a
        if float(diff @ diff) < dmin2_frozen[i]:
            a += gammas[i] * diff
    return a, avg / n


def recursion_seq(a1: float, c: float, rho: float, n_max: int) -> np.ndarray:
    out = np.empty(n_max)
    a = float(a1)
    for i in range(n_max):
        out[i] = a
        a = a - c * a ** (1.0 + rho)
    return out
