"""Quasi-Monte-Carlo comparison suite: Van der Corput / Halton generators,
star discrepancy, concatenated optimal grids, and the uniform-law
quantization constants of low-discrepancy prefixes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .distributions import Distribution1D, uniform01
from .quantization import IntervalTable, Quantizer, distortion_exact_1d

J_1_1 = 0.25  # lim N e_{1,N}(U[0,1])
J_2_1 = 1.0 / (2.0 * math.sqrt(3.0))  # lim N e_{2,N}(U[0,1])


def vdc(base: int, n: int) -> np.ndarray:
    """First n terms of the base-b Van der Corput sequence (radical
    inverse of the index digits)."""
    if base < 2:
        raise ValueError("base must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty(n)
    for i in range(1, n + 1):
        k, f, r = i, 1.0, 0.0
        while k > 0:
            k, digit = divmod(k, base)
            f /= base
            r += f * digit
        out[i - 1] = r
    return out


def _first_primes(n: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < n:
        if all(cand % p for p in primes):
            primes.append(cand)
        cand += 1
    return primes


def halton(dim: int, n: int) -> np.ndarray:
    """First n Halton points in [0,1)^dim (bases: first dim primes)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    bases = _first_primes(dim)
    return np.column_stack([vdc(b, n) for b in bases])


@dataclass(frozen=True)
class LowDiscrepancySpec:
    """Generator description: kind 'vdc' with a base, or 'halton' with a
    dimension."""

    kind: str
    param: int
    count: int

    def generate(self) -> np.ndarray:
        if self.kind == "vdc":
            return vdc(self.param, self.count)
        if self.kind == "halton":
            return halton(self.param, self.count)
        raise ValueError(f"unknown low-discrepancy kind {self.kind!r}")


def star_discrepancy_1d(points) -> float:
    """Exact D*_N of a 1-D point set via the sorted-points formula."""
    x = np.sort(np.asarray(points, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empty point set")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("points must lie in [0, 1]")
    n = x.size
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - x, x - (i - 1) / n)))


def star_discrepancy_nd(points: np.ndarray) -> float:
    """Approximate D*_N in d >= 2: the sup is scanned over the grid of
    observed coordinate values (plus 1), checking closed and open boxes.
    Exact only in the limit; intended for reporting, not acceptance."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError("star_discrepancy_nd needs an (N, d>=2) array")
    n, d = pts.shape
    if n > 64:
        raise ValueError("capped at N <= 64 points (cost grows like N^d)")
    axes = [np.unique(np.concatenate([pts[:, j], [1.0]])) for j in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    corners = np.stack([g.ravel() for g in grids], axis=1)
    best = 0.0
    for u in corners:
        vol = float(np.prod(u))
        closed = float(np.mean(np.all(pts <= u, axis=1)))
        open_ = float(np.mean(np.all(pts < u, axis=1)))
        best = max(best, abs(closed - vol), abs(open_ - vol))
    return best


@dataclass(frozen=True)
class ConstantsTrajectory:
    """Per-level scaled errors N * e_p plus window min/max proxies."""

    p: float
    scaled: np.ndarray  # index N-1 holds N * e_p of the first N points
    liminf_proxy: float
    limsup_proxy: float
    window: tuple[int, int]


def scaled_error_trajectory(
    points: Sequence[float], p: float, dist: Distribution1D | None = None
) -> np.ndarray:
    """N * e_p(first N points) for every prefix of a 1-D sequence."""
    dist = dist or uniform01()
    table = IntervalTable(dist, p)
    out = np.empty(len(points))
    for i, a in enumerate(points):
        table.insert(float(a))
        out[i] = (i + 1) * table.distortion()
    return out


def _window_proxies(scaled: np.ndarray, window: tuple[int, int]):
    lo, hi = window
    vals = scaled[lo - 1 : hi]
    return float(np.min(vals)), float(np.max(vals))


def vdc_quantization_constants(
    p: float, n_max: int, base: int = 2
) -> ConstantsTrajectory:
    """Scaled L^p errors of VdC prefixes under U[0,1]; the liminf/limsup
    proxies are the min/max over the top half N in [n_max/2, n_max]."""
    if n_max < 8:
        raise ValueError("n_max must be >= 8")
    points = vdc(base, n_max)
    scaled = scaled_error_trajectory(points, p)
    window = (n_max // 2, n_max)
    liminf, limsup = _window_proxies(scaled, window)
    return ConstantsTrajectory(
        p=float(p), scaled=scaled, liminf_proxy=liminf, limsup_proxy=limsup,
        window=window,
    )


def optimal_uniform_grid(n: int) -> np.ndarray:
    """The L^p-optimal n-point grid of U[0,1]: (2k-1)/(2n)."""
    return (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)


def concatenated_sequence(dist: Distribution1D | None = None, n_levels: int = 12) -> np.ndarray:
    """Sequence stacking the optimal 2^l grids, l = 0..n_levels-1.

    Block l occupies indices 2^l..2^(l+1)-1 (1-based) and holds the optimal
    grid of size 2^l in increasing order.  Only U[0,1] has closed-form
    optimal grids, so other laws are rejected.
    """
    if dist is not None and dist.name != "uniform01":
        raise ValueError("concatenated_sequence supports only uniform01")
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    blocks = [optimal_uniform_grid(2**level) for level in range(n_levels)]
    return np.concatenate(blocks)


@dataclass(frozen=True)
class ProinovCheck:
    """Both sides of the d=1 modulus-of-continuity bound plus the
    e_1 <= D*_N domination pair."""

    lhs: float
    rhs: float
    e1: float
    dstar: float

    @property
    def bound_holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12

    @property
    def domination_holds(self) -> bool:
        return self.e1 <= self.dstar + 1e-12


def proinov_bound_check(
    points, f: Callable[[float], float], lip: float
) -> ProinovCheck:
    """Check |int f - mean f(xi_i)| <= L * D*_N on [0,1] (C_1 = 1) and the
    induced domination e_1 <= D*_N of the same point set."""
    x = np.asarray(points, dtype=float).ravel()
    dstar = star_discrepancy_1d(x)
    integral, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-12, limit=200)
    lhs = abs(integral - float(np.mean([f(float(v)) for v in x])))
    e1 = distortion_exact_1d(uniform01(), Quantizer(x), 1.0).value
    return ProinovCheck(lhs=lhs, rhs=lip * dstar, e1=e1, dstar=dstar)
