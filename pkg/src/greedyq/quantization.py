"""Quantizers, nearest-neighbor search, exact 1-D and Monte-Carlo distortion,
Voronoi weights, and quantization-based cubature.

The 1-D exact machinery is organized around midpoint cells of the sorted
grid: the cell of a point runs from the midpoint with its left neighbor to
the midpoint with its right neighbor, outer cells extend to the support
endpoints.  ``IntervalTable`` maintains the same quantities per inter-point
interval so that inserting one point is an O(1) update; it backs both the
greedy builders and the per-level distortion trajectories.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels as kernels
from .distributions import (
    Distribution1D,
    DistributionND,
    MomentOverflowError,
    cell_inertia_p,
    interval_first_moment,
    interval_mass,
    interval_second_moment,
)
from .seeding import ROLE_GENERIC, rng_for

INF = math.inf

_KDTREE_THRESHOLD = 512
_TIE_REL = 1e-12


@dataclass(frozen=True)
class DistortionRecord:
    """One distortion evaluation: e_p of a level-N grid."""

    level: int
    p: float
    value: float
    method: str  # "exact1d" | "monte_carlo"
    mc_samples: int = 0
    std_error: float = 0.0


@dataclass(frozen=True)
class VoronoiWeights:
    weights: np.ndarray
    estimation_samples: int


class Quantizer:
    """Finite grid of pairwise-distinct points in R^d."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("quantizer needs a non-empty (N, d) point array")
        self.points = np.ascontiguousarray(pts)
        self.dim = pts.shape[1]
        if self.dim == 1:
            order = np.argsort(self.points[:, 0], kind="stable")
            sorted_vals = self.points[order, 0]
            if np.any(np.diff(sorted_vals) <= 0.0):
                raise ValueError("quantizer points must be pairwise distinct")
            self.sorted_view = order
            self._sorted_vals = sorted_vals
        else:
            uniq = np.unique(self.points, axis=0)
            if uniq.shape[0] != self.points.shape[0]:
                raise ValueError("quantizer points must be pairwise distinct")
            self.sorted_view = None
            self._sorted_vals = None
        self._tree: Optional[cKDTree] = None

    def __len__(self) -> int:
        return self.points.shape[0]

    def _kdtree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.points)
        return self._tree


def _nearest_1d(q: Quantizer, x: np.ndarray):
    s = q._sorted_vals
    sv = q.sorted_view
    pos = np.searchsorted(s, x)
    left = np.clip(pos - 1, 0, len(s) - 1)
    right = np.clip(pos, 0, len(s) - 1)
    dl = np.abs(x - s[left])
    dr = np.abs(x - s[right])
    il, ir = sv[left], sv[right]
    # strict winner by distance; ties go to the smaller original index
    take_left = (dl < dr) | ((dl == dr) & (il <= ir))
    idx = np.where(take_left, il, ir)
    dist = np.where(take_left, dl, dr)
    return idx.astype(np.int64), dist


def _nearest_kdtree(q: Quantizer, x: np.ndarray):
    k = min(2, len(q))
    dist, idx = q._kdtree().query(x, k=k)
    if k == 1:
        return np.atleast_1d(idx).astype(np.int64), np.atleast_1d(dist)
    d1, d2 = dist[:, 0], dist[:, 1]
    i1, i2 = idx[:, 0], idx[:, 1]
    tie = (d2 - d1) <= _TIE_REL * np.maximum(d1, 1e-300)
    swap = tie & (i2 < i1)
    out_idx = np.where(swap, i2, i1)
    out_dist = np.where(swap, d2, d1)
    return out_idx.astype(np.int64), out_dist


def nearest_indices(q: Quantizer, queries):
    """Vectorized nearest-neighbor classification of a query batch."""
    x = np.asarray(queries, dtype=float)
    if q.dim == 1 and x.ndim <= 1:
        x = x.reshape(-1)
        return _nearest_1d(q, x)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != q.dim:
        raise ValueError(f"query dimension {x.shape[1]} != quantizer dim {q.dim}")
    if q.dim == 1:
        return _nearest_1d(q, x[:, 0])
    if len(q) <= _KDTREE_THRESHOLD:
        return kernels.nearest(q.points, x)
    return _nearest_kdtree(q, x)


def nearest(q: Quantizer, xi):
    """Index and distance of the grid point nearest to xi.

    Ties are broken to the smallest index so that projections are
    reproducible.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if xi_arr.ndim == 0:
        if q.dim != 1:
            raise ValueError(f"scalar query against a dim-{q.dim} quantizer")
        idx, dist = _nearest_1d(q, xi_arr.reshape(1))
    else:
        if xi_arr.shape != (q.dim,):
            raise ValueError(
                f"query shape {xi_arr.shape} does not match quantizer dim {q.dim}"
            )
        idx, dist = nearest_indices(q, xi_arr[None, :])
    return int(idx[0]), float(dist[0])


# ---------------------------------------------------------------------------
# Exact 1-D distortion
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


_GL_NODES = 64


def _gl_panel(fn, lo: float, hi: float, n: int = _GL_NODES) -> float:
    if hi <= lo:
        return 0.0
    x, w = _leggauss(n)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return float(half * np.sum(w * fn(mid + half * x)))


def _half_cell_gl(dist: Distribution1D, center: float, lo: float, hi: float, p: float):
    """int_lo^hi |xi - center|^p dmu via fixed-order quadrature in quantile
    space; center is an endpoint of [lo, hi], so the integrand has no
    interior kink."""
    ul, uh = float(dist.cdf(lo)), float(dist.cdf(hi))

    def fn(u):
        return np.abs(np.asarray(dist.quantile(u), dtype=float) - center) ** p

    return _gl_panel(fn, ul, uh)


def _interval_contribution(dist: Distribution1D, left: float, right: float, p: float):
    """Distortion mass of one inter-point interval: the part of the left
    point's cell right of it plus the part of the right point's cell left of
    the midpoint.  Half-line conventions: an infinite endpoint assigns the
    whole interval to the finite one."""
    if left == -INF and right == INF:
        raise ValueError("interval contribution needs at least one finite endpoint")
    if p in (1.0, 2.0):
        cell = lambda c, lo, hi: cell_inertia_p(dist, c, lo, hi, p)
    else:
        cell = lambda c, lo, hi: _half_cell_gl(dist, c, lo, hi, p)
    if left == -INF:
        val = cell(right, -INF, right)
    elif right == INF:
        val = cell(left, left, INF)
    else:
        mid = 0.5 * (left + right)
        val = cell(left, left, mid) + cell(right, mid, right)
    if not math.isfinite(val):
        raise MomentOverflowError(
            f"moment overflow on interval ({left}, {right}) at p={p}"
        )
    return max(val, 0.0)


class IntervalTable:
    """Per-interval L^p contributions of a growing sorted 1-D grid.

    Interval i spans consecutive sorted points (s_{i-1}, s_i) with the
    conventions s_{-1} = -inf and s_{n} = +inf.  The contributions sum to
    e_p^p of the grid, and inserting a point rewrites exactly one interval,
    so per-level trajectories cost O(1) integral evaluations each.
    """

    def __init__(self, dist: Distribution1D, p: float, points: Sequence[float] = ()):
        self.dist = dist
        self.p = float(p)
        cap = 64
        self._pts = np.empty(cap)
        self._sig = np.empty(cap + 1)
        self.n = 0
        for a in points:
            self.insert(float(a))

    def _grow(self):
        cap = len(self._pts) * 2
        pts = np.empty(cap)
        sig = np.empty(cap + 1)
        pts[: self.n] = self._pts[: self.n]
        sig[: self.n + 1] = self._sig[: self.n + 1]
        self._pts, self._sig = pts, sig

    def insert(self, a: float) -> int:
        """Insert a new point; returns the interval index it split."""
        if self.n + 1 > len(self._pts):
            self._grow()
        n = self.n
        i = int(np.searchsorted(self._pts[:n], a))
        left = self._pts[i - 1] if i > 0 else -INF
        right = self._pts[i] if i < n else INF
        if a == left or a == right:
            raise ValueError(f"point {a} already present in grid")
        self._pts[i + 1 : n + 1] = self._pts[i:n]
        self._pts[i] = a
        self._sig[i + 2 : n + 2] = self._sig[i + 1 : n + 1]
        self._sig[i] = _interval_contribution(self.dist, left, a, self.p)
        self._sig[i + 1] = _interval_contribution(self.dist, a, right, self.p)
        self.n = n + 1
        return i

    @property
    def points(self) -> np.ndarray:
        return self._pts[: self.n].copy()

    @property
    def contributions(self) -> np.ndarray:
        return self._sig[: self.n + 1].copy()

    def total(self) -> float:
        if self.n == 0:
            raise ValueError("empty table")
        return float(np.sum(self._sig[: self.n + 1]))

    def distortion(self) -> float:
        return self.total() ** (1.0 / self.p)

    def argmax_interval(self, tie_rel: float = _TIE_REL) -> int:
        """Index of the max-contribution interval; near-ties (relative
        tolerance) resolve to the smallest index, as symmetric laws hit
        exact ties constantly."""
        vals = self._sig[: self.n + 1]
        mx = float(np.max(vals))
        return int(np.argmax(vals >= mx - tie_rel * max(abs(mx), 1e-300)))

    def interval_bounds(self, i: int) -> tuple[float, float]:
        left = self._pts[i - 1] if i > 0 else -INF
        right = self._pts[i] if i < self.n else INF
        return float(left), float(right)


def _cells_of_sorted(dist: Distribution1D, s: np.ndarray):
    bounds = np.empty(len(s) + 1)
    bounds[0] = -INF
    bounds[-1] = INF
    bounds[1:-1] = 0.5 * (s[:-1] + s[1:])
    return bounds


def distortion_exact_1d(dist: Distribution1D, q: Quantizer, p: float) -> DistortionRecord:
    """Exact e_p of a 1-D grid under the law, cell by midpoint cell."""
    if q.dim != 1:
        raise ValueError("distortion_exact_1d needs a 1-D quantizer")
    s = q._sorted_vals
    bounds = _cells_of_sorted(dist, s)
    lo, hi = bounds[:-1], bounds[1:]
    if p == 2.0 or p == 1.0:
        if p == 2.0:
            cells = (
                interval_second_moment(dist, lo, hi)
                - 2.0 * s * interval_first_moment(dist, lo, hi)
                + s * s * interval_mass(dist, lo, hi)
            )
        else:
            left = s * interval_mass(dist, lo, s) - interval_first_moment(dist, lo, s)
            right = interval_first_moment(dist, s, hi) - s * interval_mass(dist, s, hi)
            cells = left + right
        total = float(np.sum(np.maximum(cells, 0.0)))
    else:
        total = 0.0
        for i, c in enumerate(s):
            total += cell_inertia_p(dist, float(c), float(bounds[i]), float(bounds[i + 1]), p)
    if not math.isfinite(total):
        raise MomentOverflowError(f"moment overflow at p={p} for {dist.name}")
    return DistortionRecord(
        level=len(q), p=float(p), value=total ** (1.0 / p), method="exact1d"
    )


def distortion_trajectory(
    dist: Distribution1D, points: Sequence[float], p: float
) -> np.ndarray:
    """e_p at every level of a 1-D insertion sequence (index N-1 holds level N)."""
    table = IntervalTable(dist, p)
    out = np.empty(len(points))
    for i, a in enumerate(points):
        table.insert(float(a))
        out[i] = table.distortion()
    return out


# ---------------------------------------------------------------------------
# Monte-Carlo estimation
# ---------------------------------------------------------------------------


def _min_dist(q: Quantizer, x: np.ndarray) -> np.ndarray:
    if q.dim >= 2 and len(q) > _KDTREE_THRESHOLD:
        _, dist = _nearest_kdtree(q, x)
        return dist
    return np.sqrt(kernels.min_dist_sq(q.points, x))


def distortion_mc(
    dist: DistributionND,
    q: Quantizer,
    p: float,
    samples: int,
    seed: int,
) -> DistortionRecord:
    """Monte-Carlo e_p with a delta-method standard error."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if q.dim != dist.dim:
        raise ValueError(f"quantizer dim {q.dim} != distribution dim {dist.dim}")
    rng = rng_for(seed, ROLE_GENERIC)
    x = dist.sampler(rng, samples)
    d = _min_dist(q, x)
    dp = d**p
    m = float(dp.mean())
    value = m ** (1.0 / p)
    if samples > 1 and m > 0.0:
        se_m = float(dp.std(ddof=1)) / math.sqrt(samples)
        se = se_m * value ** (1.0 - p) / p
    else:
        se = 0.0
    return DistortionRecord(
        level=len(q),
        p=float(p),
        value=value,
        method="monte_carlo",
        mc_samples=samples,
        std_error=se,
    )


def voronoi_weights(
    dist: DistributionND, q: Quantizer, samples: int, seed: int
) -> VoronoiWeights:
    """Cell masses estimated as nearest-neighbor win frequencies."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = rng_for(seed, ROLE_GENERIC)
    x = dist.sampler(rng, samples)
    idx, _ = nearest_indices(q, x)
    counts = np.bincount(idx, minlength=len(q))
    return VoronoiWeights(weights=counts / samples, estimation_samples=samples)


def cubature(f: Callable, q: Quantizer, weights=None) -> float:
    """Weighted grid sum  sum_i w_i f(a_i); uniform weights when omitted."""
    if weights is None:
        w = np.full(len(q), 1.0 / len(q))
    elif isinstance(weights, VoronoiWeights):
        w = np.asarray(weights.weights, dtype=float)
    else:
        w = np.asarray(weights, dtype=float)
    if w.shape != (len(q),):
        raise ValueError("weights length must match the number of points")
    if q.dim == 1:
        vals = np.array([f(float(a)) for a in q.points[:, 0]])
    else:
        vals = np.array([f(a) for a in q.points])
    return float(np.dot(w, vals))


# ---------------------------------------------------------------------------
# Grid CSV format: one point per row, columns x1,...,xd
# ---------------------------------------------------------------------------


def write_grid_csv(path, q: Quantizer) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(q.dim)])
        for row in q.points:
            writer.writerow([repr(float(v)) for v in row])


def read_grid_csv(path) -> Quantizer:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or not rows[0][0].startswith("x"):
        raise ValueError(f"{path}: not a grid CSV (expected x1,...,xd header)")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return Quantizer(data)
