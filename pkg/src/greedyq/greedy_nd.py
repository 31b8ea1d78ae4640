"""Stochastic greedy sequence construction in dimension d >= 2: randomized
Lloyd (conditional-mean ratio estimation on fresh sample batches) and CLVQ
with Ruppert-Polyak averaging.  Previously placed points never move.

All randomness derives from the run seed through per-(level, role) streams
(see seeding), so a build is reproducible for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as kernels
from .distributions import DistributionND, EmptyCellError
from .greedy1d import GreedySequence
from .quantization import DistortionRecord
from .seeding import (
    ROLE_EVAL,
    ROLE_START,
    ROLE_STATIONARITY,
    ROLE_SWEEP,
    rng_for,
)


def _default_samples(n: int) -> int:
    return 1000 * n


@dataclass(frozen=True)
class StochasticRunConfig:
    """Knobs of a stochastic build.

    ``samples_per_level`` is M(N); the default matches the reference
    experiment M(N) = 1000*N.  The CLVQ step is gamma_n = c/(c + n^alpha)
    with alpha in (1/2, 1).  ``moving_tol_factor`` stops Lloyd sweeps once
    the update moves less than this fraction of the current distortion
    estimate.
    """

    seed: int
    samples_per_level: Callable[[int], int] = _default_samples
    clvq_c: float = 1.0
    clvq_alpha: float = 0.75
    averaging: bool = True
    moving_tol_factor: float = 1e-4
    max_sweeps: int = 50
    eval_samples: int = 200_000
    start_candidates: int = 64
    start_rule: str = "sample"

    def __post_init__(self):
        if not (0.5 < self.clvq_alpha < 1.0):
            raise ValueError("clvq_alpha must lie in (1/2, 1)")
        if self.samples_per_level(1) < 1:
            raise ValueError("samples_per_level must be >= 1")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.start_rule not in ("gain", "sample", "farthest"):
            raise ValueError("start_rule must be 'gain', 'sample' or 'farthest'")


@dataclass(frozen=True)
class LevelResult:
    point: np.ndarray
    residual: float
    std_error: float
    sweeps: int
    distortion_estimate: float


def _frozen_array(frozen, dim: int) -> np.ndarray:
    if frozen is None:
        return np.empty((0, dim))
    arr = getattr(frozen, "points", frozen)
    arr = np.asarray(arr, dtype=float)
    if arr.size == 0:
        return np.empty((0, dim))
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def randomized_lloyd_level(
    dist: DistributionND,
    frozen,
    start: np.ndarray,
    cfg: StochasticRunConfig,
    level: Optional[int] = None,
) -> LevelResult:
    """Fit one new point by ratio-estimated conditional means.

    Each sweep draws a fresh batch of M(N) samples, classifies it against
    the frozen grid plus the moving point, and replaces the point by the
    in-cell sample mean.  An empty cell restarts from the batch point
    farthest from the grid (at most 5 restarts).  The returned std error is
    the vector-norm standard error of the final ratio estimator.
    """
    frozen_pts = _frozen_array(frozen, dist.dim)
    n_level = level if level is not None else frozen_pts.shape[0] + 1
    m = int(cfg.samples_per_level(n_level))
    rng = rng_for(cfg.seed, n_level, ROLE_SWEEP)
    a = np.asarray(start, dtype=float).copy()
    if frozen_pts.size and np.any(np.all(frozen_pts == a, axis=1)):
        raise ValueError("start point coincides with a frozen point")
    redraws = 0
    movement = math.inf
    std_error = 0.0
    e2_hat = math.inf
    sweeps = 0
    while sweeps < cfg.max_sweeps:
        batch = dist.sampler(rng, m)
        count, sum_x, sum_x2, sum_dmin2, far_idx = kernels.lloyd_accumulate(
            frozen_pts, a, batch
        )
        if count == 0:
            redraws += 1
            if redraws > 5:
                raise EmptyCellError(
                    f"level {n_level}: moving cell stayed empty after 5 restarts"
                )
            a = batch[far_idx].copy()
            continue
        sweeps += 1
        new_a = sum_x / count
        e2_hat = math.sqrt(sum_dmin2 / m)
        movement = float(np.linalg.norm(new_a - a))
        a = new_a
        if count > 1:
            var = (sum_x2 / count - new_a**2) * count / (count - 1)
            std_error = float(np.sqrt(np.sum(np.maximum(var, 0.0)) / count))
        if movement <= cfg.moving_tol_factor * e2_hat:
            break
    return LevelResult(
        point=a,
        residual=movement,
        std_error=std_error,
        sweeps=sweeps,
        distortion_estimate=e2_hat,
    )


@dataclass(frozen=True)
class ClvqResult:
    point: np.ndarray
    averaged: np.ndarray


def clvq_level(
    dist: DistributionND,
    frozen,
    start: np.ndarray,
    cfg: StochasticRunConfig,
    level: Optional[int] = None,
    n_steps: Optional[int] = None,
) -> ClvqResult:
    """One competitive-learning pass for the newest point.

    The point moves toward a stimulus only when it wins the nearest
    neighbor competition against the frozen grid (strict inequality);
    the Ruppert-Polyak average of the iterates is returned alongside the
    final iterate.
    """
    frozen_pts = _frozen_array(frozen, dist.dim)
    n_level = level if level is not None else frozen_pts.shape[0] + 1
    m = int(n_steps if n_steps is not None else cfg.samples_per_level(n_level))
    rng = rng_for(cfg.seed, n_level, ROLE_SWEEP)
    stimuli = dist.sampler(rng, m)
    if frozen_pts.shape[0]:
        dmin2 = kernels.min_dist_sq(frozen_pts, stimuli)
    else:
        dmin2 = np.full(m, np.inf)
    steps = np.arange(1, m + 1, dtype=float)
    gammas = cfg.clvq_c / (cfg.clvq_c + steps**cfg.clvq_alpha)
    a, avg = kernels.clvq_run(stimuli, dmin2, np.asarray(start, dtype=float), gammas)
    return ClvqResult(point=a, averaged=avg)


def _pick_start(
    dist: DistributionND, points: np.ndarray, cfg: StochasticRunConfig, level: int
) -> np.ndarray:
    """Level start point from one candidate batch of mu-samples.

    'gain' (default) scores each candidate by the empirical distortion
    reduction it would bring over the batch itself, mean_j max(0, d(x_j)^2
    - |x_j - x_i|^2), and takes the best: a cheap estimate of the greedy
    objective.  'sample' takes the first candidate (a plain draw from mu);
    'farthest' takes the candidate with maximal min-distance to the grid,
    which on unbounded laws biases starts into extreme tails and lets the
    locally converging fit over-tile the periphery.  Level 1 starts from
    the mean.
    """
    if level == 1:
        return np.asarray(dist.mean, dtype=float).copy()
    rng = rng_for(cfg.seed, level, ROLE_START)
    cands = dist.sampler(rng, cfg.start_candidates)
    if cfg.start_rule == "sample":
        return cands[0].copy()
    d2 = kernels.min_dist_sq(points, cands)
    if cfg.start_rule == "farthest":
        return cands[int(np.argmax(d2))].copy()
    diff = cands[:, None, :] - cands[None, :, :]
    pair = np.einsum("ijk,ijk->ij", diff, diff)
    gains = np.maximum(0.0, d2[:, None] - pair).mean(axis=0)
    return cands[int(np.argmax(gains))].copy()


def _delta_se_e2(dmin2: np.ndarray, e2: float) -> float:
    if e2 <= 0.0 or dmin2.size < 2:
        return 0.0
    se_m = float(dmin2.std(ddof=1)) / math.sqrt(dmin2.size)
    return se_m / (2.0 * e2)


def stationarity_check(
    dist: DistributionND,
    frozen_pts: np.ndarray,
    a: np.ndarray,
    point_se: float,
    cfg: StochasticRunConfig,
    level: int,
) -> tuple[bool, float, float]:
    """Compare the fitted point against a fresh-batch centroid estimate.

    Passes when |a - centroid_hat| <= 3 * (se_centroid + se_point): both
    sides of the difference are ratio estimators, so the union bound over
    their 3-sigma events gives the conservative threshold.
    """
    m = int(cfg.samples_per_level(level))
    rng = rng_for(cfg.seed, level, ROLE_STATIONARITY)
    batch = dist.sampler(rng, m)
    count, sum_x, sum_x2, _sum_dmin2, _far = kernels.lloyd_accumulate(
        frozen_pts, a, batch
    )
    if count < 2:
        return False, math.inf, 0.0
    centroid = sum_x / count
    var = (sum_x2 / count - centroid**2) * count / (count - 1)
    se_c = float(np.sqrt(np.sum(np.maximum(var, 0.0)) / count))
    gap = float(np.linalg.norm(a - centroid))
    threshold = 3.0 * (se_c + point_se)
    return gap <= threshold, gap, threshold


def build_greedy_nd(
    dist: DistributionND,
    n_max: int,
    cfg: StochasticRunConfig,
    solver: str = "rlloyd",
) -> GreedySequence:
    """Greedy sequence of n_max points with a Monte-Carlo distortion
    trajectory.

    The trajectory is evaluated on one shared batch (common random numbers
    across levels), updated incrementally as points are added, so it is
    non-increasing by construction up to estimator noise.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if solver not in ("rlloyd", "clvq"):
        raise ValueError("solver must be 'rlloyd' or 'clvq'")
    d = dist.dim
    points = np.empty((n_max, d))
    eval_rng = rng_for(cfg.seed, 0, ROLE_EVAL)
    eval_batch = dist.sampler(eval_rng, cfg.eval_samples)
    eval_dmin2 = np.full(cfg.eval_samples, np.inf)
    trajectory: list[DistortionRecord] = []
    residuals = np.zeros(n_max)
    iterations = np.zeros(n_max, dtype=np.int64)
    stationarity_ok = np.zeros(n_max, dtype=bool)
    for level in range(1, n_max + 1):
        frozen_pts = points[: level - 1]
        start = _pick_start(dist, frozen_pts, cfg, level)
        if solver == "rlloyd":
            res = randomized_lloyd_level(dist, frozen_pts, start, cfg, level=level)
            a, point_se, sweeps = res.point, res.std_error, res.sweeps
            residuals[level - 1] = res.residual
        else:
            res = clvq_level(dist, frozen_pts, start, cfg, level=level)
            a = res.averaged if cfg.averaging else res.point
            point_se = 0.0
            sweeps = int(cfg.samples_per_level(level))
            residuals[level - 1] = float(np.linalg.norm(res.point - res.averaged))
        points[level - 1] = a
        iterations[level - 1] = sweeps
        ok, _gap, _thr = stationarity_check(
            dist, frozen_pts, a, point_se, cfg, level
        )
        stationarity_ok[level - 1] = ok
        eval_dmin2 = np.minimum(
            eval_dmin2, kernels.min_dist_sq(a[None, :], eval_batch)
        )
        e2 = math.sqrt(float(eval_dmin2.mean()))
        trajectory.append(
            DistortionRecord(
                level=level,
                p=2.0,
                value=e2,
                method="monte_carlo",
                mc_samples=cfg.eval_samples,
                std_error=_delta_se_e2(eval_dmin2, e2),
            )
        )
    return GreedySequence(
        points=points,
        trajectory=trajectory,
        solver=solver,
        iterations=iterations,
        residuals=residuals,
        dim=d,
        stationarity_ok=stationarity_ok,
        meta={"distribution": dist.name, "p": 2.0, "seed": cfg.seed},
    )
