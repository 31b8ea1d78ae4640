"""Deterministic greedy sequence construction for scalar laws.

Level by level: locate the inter-point interval with maximal local inertia,
then solve the one-point problem inside it, either by the conditional-mean
fixed-point iteration (Lloyd) or by a curvature-thresholded Newton descent
(Forgy).  All previously placed points stay frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .distributions import (
    Distribution1D,
    EmptyCellError,
    conditioned_nonnegative,
    interval_first_moment,
    interval_mass,
    is_symmetric_about_zero,
    restricted_centroid,
)
from .quantization import DistortionRecord, IntervalTable

INF = math.inf

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000


class CurvatureLossError(ArithmeticError):
    """The Newton curvature term rho(a) was not positive."""


class SolverDivergedError(RuntimeError):
    """An inner solver hit its iteration cap; carries the last iterate."""

    def __init__(self, message: str, last_iterate: float, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass
class GreedySequence:
    """Greedy points in insertion order with their distortion trajectory."""

    points: np.ndarray
    trajectory: list[DistortionRecord]
    solver: str
    iterations: np.ndarray
    residuals: np.ndarray
    dim: int = 1
    stationarity_ok: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def distortions(self) -> np.ndarray:
        return np.array([r.value for r in self.trajectory])

    def scaled_distortions(self) -> np.ndarray:
        """N^(1/d) * e_p per level."""
        levels = np.arange(1, len(self.trajectory) + 1)
        return levels ** (1.0 / self.dim) * self.distortions()


@dataclass(frozen=True)
class InertiaTable:
    """Quadratic local inertia of each inter-point interval at one level."""

    sorted_points: np.ndarray
    sigma2: np.ndarray
    argmax_index: int


def inertia_table(dist: Distribution1D, pts: Sequence[float]) -> InertiaTable:
    """Inter-point inertias with half-line conventions at the ends.

    Ties in the argmax resolve to the smallest interval index.
    """
    table = IntervalTable(dist, 2.0, sorted(float(a) for a in pts))
    return InertiaTable(
        sorted_points=table.points,
        sigma2=table.contributions,
        argmax_index=table.argmax_interval(),
    )


def _cell_bounds(a: float, left: float, right: float) -> tuple[float, float]:
    lb = -INF if left == -INF else 0.5 * (left + a)
    rb = INF if right == INF else 0.5 * (a + right)
    return lb, rb


def lloyd_fixed_point(
    dist: Distribution1D,
    left: float,
    right: float,
    start: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, int, float]:
    """Iterate a -> E(X | X in cell(a)) inside the interval (left, right).

    left/right are the frozen neighbor points, -inf/+inf when absent; the
    cell of a runs between the midpoints toward them.  Returns the fixed
    point, the iteration count, and the last movement.
    """
    if not (left < start < right):
        raise ValueError("start must lie strictly inside (left, right)")
    a = float(start)
    for it in range(1, max_iter + 1):
        lb, rb = _cell_bounds(a, left, right)
        a_next = restricted_centroid(dist, lb, rb)
        move = abs(a_next - a)
        a = a_next
        if move <= tol:
            return a, it, move
    raise SolverDivergedError(
        f"lloyd_fixed_point: no convergence in {max_iter} iterations "
        f"(residual {move:.3e})",
        last_iterate=a,
        residual=move,
    )


def forgy_curvature(
    dist: Distribution1D, a: float, left: float, right: float
) -> float:
    """Second derivative rho(a) of the one-point distortion: the cell mass
    plus the two boundary-density terms.  Terms attached to an absent
    (infinite) neighbor vanish."""
    if dist.pdf is None:
        raise ValueError(f"{dist.name} has no density; Forgy needs one")
    lb, rb = _cell_bounds(a, left, right)
    rho = interval_mass(dist, lb, rb)
    if left != -INF:
        rho += 0.5 * (a - left) * float(dist.pdf(lb))
    if right != INF:
        rho += 0.5 * (right - a) * float(dist.pdf(rb))
    return rho


def forgy_newton(
    dist: Distribution1D,
    left: float,
    right: float,
    start: float,
    steps: Optional[Callable[[int], float]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, int, float]:
    """Newton zero search for the same stationarity equation as Lloyd.

    The step is min(gamma_n, 1/rho(a)), which keeps every iterate inside
    (left, right).  Default schedule gamma_n = 1 (pure curvature threshold).
    """
    if dist.pdf is None:
        raise ValueError(f"{dist.name} has no density; Forgy needs one")
    if not (left < start < right):
        raise ValueError("start must lie strictly inside (left, right)")
    gamma = steps if steps is not None else (lambda n: 1.0)
    a = float(start)
    for it in range(1, max_iter + 1):
        lb, rb = _cell_bounds(a, left, right)
        mass = interval_mass(dist, lb, rb)
        grad = a * mass - interval_first_moment(dist, lb, rb)
        rho = forgy_curvature(dist, a, left, right)
        if rho <= 0.0:
            raise CurvatureLossError(
                f"curvature loss: rho({a}) = {rho} <= 0 on ({left}, {right})"
            )
        step = min(float(gamma(it)), 1.0 / rho)
        a_next = a - step * grad
        move = abs(a_next - a)
        a = a_next
        if move <= tol:
            return a, it, move
    raise SolverDivergedError(
        f"forgy_newton: no convergence in {max_iter} iterations "
        f"(residual {move:.3e})",
        last_iterate=a,
        residual=move,
    )


_SOLVERS = {"lloyd": lloyd_fixed_point, "forgy": forgy_newton}


def _stationarity_residual(
    dist: Distribution1D, a: float, left: float, right: float
) -> float:
    lb, rb = _cell_bounds(a, left, right)
    return abs(a - restricted_centroid(dist, lb, rb))


def _solve_level(dist, solver, left, right, start, tol, level):
    try:
        return _SOLVERS[solver](dist, left, right, start, tol=tol)
    except (SolverDivergedError, CurvatureLossError, EmptyCellError) as exc:
        exc.args = (f"level {level}: {exc.args[0]}",) + exc.args[1:]
        raise


def build_greedy_1d(
    dist: Distribution1D,
    n_max: int,
    p: float = 2.0,
    solver: str = "lloyd",
    tol: float = DEFAULT_TOL,
) -> GreedySequence:
    """Quadratic greedy sequence of length up to n_max.

    Starts from the mean, then repeatedly splits the maximal-inertia
    interval.  Stops early when the law's support is exhausted (zero
    residual inertia).  The recorded residual per level is the distance of
    the new point to the centroid of its own Voronoi cell.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if p != 2.0:
        raise ValueError("the deterministic greedy builder is quadratic only (p=2)")
    if solver not in _SOLVERS:
        raise ValueError(f"solver must be one of {sorted(_SOLVERS)}")
    a1 = float(dist.mean)
    table = IntervalTable(dist, 2.0, [a1])
    points = [a1]
    trajectory = [
        DistortionRecord(level=1, p=2.0, value=table.distortion(), method="exact1d")
    ]
    iterations = [1]
    residuals = [_stationarity_residual(dist, a1, -INF, INF)]
    for level in range(2, n_max + 1):
        if table.total() <= 0.0:
            break  # support exhausted (atomic laws): distortion already zero
        i0 = table.argmax_interval()
        left, right = table.interval_bounds(i0)
        lo = max(left, dist.support[0])
        hi = min(right, dist.support[1])
        start = restricted_centroid(dist, lo, hi)
        if not (left < start < right):  # centroid hit an endpoint atom
            start = 0.5 * (max(left, lo) + min(right, hi))
        a, iters, _move = _solve_level(dist, solver, left, right, start, tol, level)
        table.insert(a)
        points.append(a)
        trajectory.append(
            DistortionRecord(level=level, p=2.0, value=table.distortion(), method="exact1d")
        )
        iterations.append(iters)
        residuals.append(_stationarity_residual(dist, a, left, right))
    return GreedySequence(
        points=np.array(points),
        trajectory=trajectory,
        solver=solver,
        iterations=np.array(iterations),
        residuals=np.array(residuals),
        dim=1,
        meta={"distribution": dist.name, "p": 2.0},
    )


def replay_trajectory(
    dist: Distribution1D, points: Sequence[float], p: float
) -> tuple[list[DistortionRecord], np.ndarray]:
    """Distortion records and stationarity residuals for a given insertion
    order (used for mirrored sequences and cross-exponent evaluation)."""
    table = IntervalTable(dist, p)
    records: list[DistortionRecord] = []
    residuals = np.empty(len(points))
    for i, a in enumerate(points):
        pos = table.insert(float(a))
        left, _ = table.interval_bounds(pos)
        _, right = table.interval_bounds(pos + 1)
        records.append(
            DistortionRecord(
                level=i + 1, p=float(p), value=table.distortion(), method="exact1d"
            )
        )
        residuals[i] = _stationarity_residual(dist, float(a), left, right)
    return records, residuals


def build_greedy_symmetric(
    dist: Distribution1D,
    n_max: int,
    solver: str = "lloyd",
    tol: float = DEFAULT_TOL,
) -> GreedySequence:
    """Greedy sequence of a law symmetric about 0 via its conditioned half.

    The half-line law keeps the origin as a fixed but active point; each
    half-point then appears twice, mirrored: (0, b1, -b1, b2, -b2, ...).
    The trajectory is evaluated against the full symmetric law.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not is_symmetric_about_zero(dist):
        raise ValueError(f"{dist.name} is not symmetric about 0")
    half = conditioned_nonnegative(dist)
    n_half = (n_max - 1 + 1) // 2  # mirrored pairs after the origin
    half_table = IntervalTable(half, 2.0, [0.0])
    half_points: list[float] = []
    half_iters: list[int] = []
    for level in range(1, n_half + 1):
        i0 = half_table.argmax_interval()
        left, right = half_table.interval_bounds(i0)
        lo = max(left, half.support[0])
        hi = min(right, half.support[1])
        start = restricted_centroid(half, lo, hi)
        if not (left < start < right):
            start = 0.5 * (max(left, lo) + min(right, hi))
        a, iters, _move = _solve_level(half, solver, left, right, start, tol, level)
        half_table.insert(a)
        half_points.append(a)
        half_iters.append(iters)
    points = [0.0]
    iterations = [1]
    for a, it in zip(half_points, half_iters):
        points.extend((a, -a))
        iterations.extend((it, it))
    points = points[:n_max]
    iterations = iterations[:n_max]
    trajectory, residuals = replay_trajectory(dist, points, 2.0)
    return GreedySequence(
        points=np.array(points),
        trajectory=trajectory,
        solver=solver,
        iterations=np.array(iterations),
        residuals=residuals,
        dim=1,
        meta={"distribution": dist.name, "p": 2.0, "symmetric": True},
    )
