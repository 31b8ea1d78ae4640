"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

Backend selection is driven by the ``GREEDYQ_BACKEND`` environment variable:
``auto`` (default) uses numba when importable and falls back to numpy,
``numba`` requires it, ``numpy`` forces the fallback.

Batch kernels are dispatched over fixed-size chunks.  Chunks may be
processed by a thread pool capped by ``GREEDYQ_THREADS``, but partial
results are always reduced in chunk order, so results are bit-identical
for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_CHUNK_BUDGET = 1 << 22  # target point*query pairs per chunk


def _select_backend():
    choice = os.environ.get("GREEDYQ_BACKEND", "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"GREEDYQ_BACKEND must be auto|numba|numpy, got {choice!r}")
    if choice in ("auto", "numba"):
        try:
            from . import numba_impl as impl

            return impl, "numba"
        except ImportError:
            if choice == "numba":
                raise
    from . import numpy_impl as impl

    return impl, "numpy"


_impl, BACKEND = _select_backend()


def thread_count() -> int:
    """Worker cap from GREEDYQ_THREADS (default 1)."""
    raw = os.environ.get("GREEDYQ_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GREEDYQ_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _chunk_bounds(m: int, k: int) -> list[tuple[int, int]]:
    size = max(1024, _CHUNK_BUDGET // max(k, 1))
    return [(lo, min(lo + size, m)) for lo in range(0, m, size)]


def _map_chunks(fn, m: int, k: int):
    bounds = _chunk_bounds(m, k)
    workers = thread_count()
    if workers == 1 or len(bounds) == 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in bounds]
        return [f.result() for f in futures]


def _c2d(x) -> np.ndarray:
    return np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))


def min_dist_sq(points, queries) -> np.ndarray:
    """Squared distance from each query to its nearest point."""
    points, queries = _c2d(points), _c2d(queries)
    parts = _map_chunks(
        lambda lo, hi: _impl.min_dist_sq(points, queries[lo:hi]),
        queries.shape[0],
        points.shape[0],
    )
    return np.concatenate(parts)


def nearest(points, queries):
    """Nearest-point index (smallest index on ties) and distance per query."""
    points, queries = _c2d(points), _c2d(queries)
    parts = _map_chunks(
        lambda lo, hi: _impl.nearest(points, queries[lo:hi]),
        queries.shape[0],
        points.shape[0],
    )
    idx = np.concatenate([p[0] for p in parts])
    dist = np.concatenate([p[1] for p in parts])
    return idx, dist


def counts_nearest(points, queries) -> np.ndarray:
    """Per-point counts of nearest-neighbor wins over the query batch."""
    points, queries = _c2d(points), _c2d(queries)
    parts = _map_chunks(
        lambda lo, hi: _impl.counts_nearest(points, queries[lo:hi]),
        queries.shape[0],
        points.shape[0],
    )
    return np.sum(np.stack(parts, axis=0), axis=0)


def lloyd_accumulate(frozen, a, batch):
    """One randomized-Lloyd classification pass; see numpy_impl for fields."""
    frozen = (
        _c2d(frozen)
        if np.size(frozen)
        else np.empty((0, np.size(a)), dtype=float)
    )
    a = np.ascontiguousarray(np.asarray(a, dtype=float).ravel())
    batch = _c2d(batch)
    parts = _map_chunks(
        lambda lo, hi: (lo, _impl.lloyd_accumulate(frozen, a, batch[lo:hi])),
        batch.shape[0],
        frozen.shape[0] + 1,
    )
    count = int(sum(p[1][0] for p in parts))
    sum_x = np.sum(np.stack([p[1][1] for p in parts], axis=0), axis=0)
    sum_x2 = np.sum(np.stack([p[1][2] for p in parts], axis=0), axis=0)
    sum_dmin2 = float(np.sum(np.array([p[1][3] for p in parts])))
    # farthest point: compare chunk winners in chunk order
    far_idx, far_val = 0, -1.0
    for lo, res in parts:
        cand = lo + res[4]
        val = float(np.sum((batch[cand] - a) ** 2))
        if frozen.shape[0]:
            val = min(val, float(min_dist_sq(frozen, batch[cand : cand + 1])[0]))
        if val > far_val:
            far_val, far_idx = val, cand
    return count, sum_x, sum_x2, sum_dmin2, far_idx


def clvq_run(stimuli, dmin2_frozen, a0, gammas):
    """Sequential competitive-learning pass (not chunked: order matters)."""
    stimuli = _c2d(stimuli)
    a0 = np.ascontiguousarray(np.asarray(a0, dtype=float).ravel())
    dmin2_frozen = np.ascontiguousarray(np.asarray(dmin2_frozen, dtype=float))
    gammas = np.ascontiguousarray(np.asarray(gammas, dtype=float))
    return _impl.clvq_run(stimuli, dmin2_frozen, a0, gammas)


def recursion_seq(a1: float, c: float, rho: float, n_max: int) -> np.ndarray:
    """Extremal sequence A_{n+1} = A_n - c*A_n^(1+rho)."""
    return _impl.recursion_seq(float(a1), float(c), float(rho), int(n_max))
