"""Numba-compiled hot kernels; same contracts as numpy_impl."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def min_dist_sq(points, queries):
    m = queries.shape[0]
    k = points.shape[0]
    d = queries.shape[1]
    out = np.empty(m)
    for i in range(m):
        best = np.inf
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = queries[i, t] - points[j, t]
                acc += diff * diff
            if acc < best:
                best = acc
        out[i] = best
    return out


@njit(cache=True, nogil=True)
def nearest(points, queries):
    m = queries.shape[0]
    k = points.shape[0]
    d = queries.shape[1]
    idx = np.empty(m, dtype=np.int64)
    dist = np.empty(m)
    for i in range(m):
        best = np.inf
        arg = 0
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = queries[i, t] - points[j, t]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = j
        idx[i] = arg
        dist[i] = np.sqrt(best)
    return idx, dist


@njit(cache=True, nogil=True)
def counts_nearest(points, queries):
    m = queries.shape[0]
    k = points.shape[0]
    d = queries.shape[1]
    counts = np.zeros(k, dtype=np.int64)
    for i in range(m):
        best = np.inf
        arg = 0
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = queries[i, t] - points[j, t]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = j
        counts[arg] += 1
    return counts


@njit(cache=True, nogil=True)
def lloyd_accumulate(frozen, a, batch):
    m = batch.shape[0]
    k = frozen.shape[0]
    d = batch.shape[1]
    count = 0
    sum_x = np.zeros(d)
    sum_x2 = np.zeros(d)
    sum_dmin2 = 0.0
    far_idx = 0
    far_val = -1.0
    for i in range(m):
        dmin_frozen = np.inf
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = batch[i, t] - frozen[j, t]
                acc += diff * diff
            if acc < dmin_frozen:
                dmin_frozen = acc
        da2 = 0.0
        for t in range(d):
            diff = batch[i, t] - a[t]
            da2 += diff * diff
        if da2 <= dmin_frozen:
            count += 1
            for t in range(d):
                sum_x[t] += batch[i, t]
                sum_x2[t] += batch[i, t] * batch[i, t]
            dmin = da2
        else:
            dmin = dmin_frozen
        sum_dmin2 += dmin
        if dmin > far_val:
            far_val = dmin
            far_idx = i
    return count, sum_x, sum_x2, sum_dmin2, far_idx


@njit(cache=True, nogil=True)
def clvq_run(stimuli, dmin2_frozen, a0, gammas):
    n = stimuli.shape[0]
    d = stimuli.shape[1]
    a = a0.copy()
    avg = np.zeros(d)
    for i in range(n):
        acc = 0.0
        for t in range(d):
            avg[t] += a[t]
            diff = stimuli[i, t] - a[t]
            acc += diff * diff
        if acc < dmin2_frozen[i]:
            g = gammas[i]
            for t in range(d):
                a[t] += g * (stimuli[i, t] - a[t])
    for t in range(d):
        avg[t] /= n
    return a, avg


@njit(cache=True, nogil=True)
def recursion_seq(a1, c, rho, n_max):
    out = np.empty(n_max)
    a = a1
    for i in range(n_max):
        out[i] = a
        a = a - c * a ** (1.0 + rho)
    return out
