"""Numerical probes of the rate-optimality apparatus: ball-mass maximal
functions and their integrability, density-power integrals, cross-exponent
distortion trajectories, and the extremal recursion bound."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _kernels as kernels
from .distributions import Distribution1D, interval_mass
from .greedy1d import GreedySequence
from .quantization import IntervalTable

INF = math.inf


@dataclass(frozen=True)
class DiagnosticValue:
    """A quadrature result together with its divergence flag."""

    value: float
    flag: str  # "finite" | "infinite" | "likely_infinite"

    @property
    def is_finite(self) -> bool:
        return self.flag == "finite"


def maximal_function(
    dist: Distribution1D,
    seq: GreedySequence,
    b: float,
    xi: float,
    n_cap: int | None = None,
) -> float:
    """Running sup over levels of lambda(B)/mu(B) for B = B(xi, b*d(xi, grid)).

    In one dimension lambda(B) = 2r and mu(B) = F(xi+r) - F(xi-r).  Levels
    where xi coincides with a grid point contribute the degenerate 0/0
    ratio, which we define as 0 (so the value at the first point is 0).
    Zero-mass balls yield +inf.
    """
    if not (0.0 < b < 0.5):
        raise ValueError("b must lie in (0, 1/2)")
    pts = np.asarray(seq.points, dtype=float).ravel()
    if n_cap is not None:
        if n_cap > len(pts):
            raise ValueError("n_cap exceeds the sequence length")
        pts = pts[:n_cap]
    dmin = np.minimum.accumulate(np.abs(xi - pts))
    radii = np.unique(b * dmin[dmin > 0.0])
    if radii.size == 0:
        return 0.0
    mass = interval_mass(dist, xi - radii, xi + radii)
    mass = np.asarray(mass, dtype=float)
    if np.any(mass <= 0.0):
        return INF
    return float(np.max(2.0 * radii / mass))


def maximal_function_integral(
    dist: Distribution1D,
    seq: GreedySequence,
    b: float,
    exponent: float,
    quad_points: int = 256,
) -> DiagnosticValue:
    """Quadrature estimate of int Psi_b^exponent dmu in quantile space.

    Divergence heuristic: the node count is refined twice (x2, x4); if each
    refinement grows the estimate by more than a factor 2 the integral is
    flagged "likely_infinite".  An exact +inf node value flags "infinite".
    """
    if exponent < 0.0:
        raise ValueError("exponent must be >= 0")

    def estimate(n: int) -> float:
        u, w = np.polynomial.legendre.leggauss(n)
        u = 0.5 * (u + 1.0)
        w = 0.5 * w
        vals = np.empty(n)
        for i, ui in enumerate(u):
            xi = float(dist.quantile(ui))
            psi = maximal_function(dist, seq, b, xi)
            if math.isinf(psi):
                return INF
            vals[i] = psi**exponent
        return float(np.dot(w, vals))

    estimates = [estimate(quad_points * (1 << k)) for k in range(3)]
    if any(math.isinf(v) for v in estimates):
        return DiagnosticValue(value=INF, flag="infinite")
    growth = [estimates[k + 1] / max(estimates[k], 1e-300) for k in range(2)]
    if all(g > 2.0 for g in growth):
        return DiagnosticValue(value=estimates[-1], flag="likely_infinite")
    return DiagnosticValue(value=estimates[-1], flag="finite")


def zador_integral(
    dist: Distribution1D, p: float, q: float, d: int = 1
) -> DiagnosticValue:
    """int phi(xi)^(1 - q/(d+p)) dxi over the support.

    The domain starts at the central 99.8% of the base law and the
    half-width triples on every unbounded side per refinement: the
    integrand's own decay scale can be much wider than the base quantiles
    (phi^eps decays on scale 1/sqrt(eps) for a Gaussian).  Three successive
    refinements each growing the value by more than 2x flag divergence.
    """
    if dist.pdf is None:
        raise ValueError(f"{dist.name} has no density")
    expo = 1.0 - q / (d + p)

    def integrand(x):
        v = float(dist.pdf(x))
        if v <= 0.0:
            return 0.0
        return v**expo

    lo = dist.support[0] if dist.support[0] != -INF else float(dist.quantile(1e-3))
    hi = dist.support[1] if dist.support[1] != INF else float(dist.quantile(1.0 - 1e-3))
    center = 0.5 * (lo + hi)
    values = []
    for _ in range(4):
        with warnings.catch_warnings():
            # divergent probes legitimately exhaust the subdivision budget
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _err = integrate.quad(integrand, lo, hi, epsabs=1e-10, limit=400)
        values.append(val)
        if dist.support[0] == -INF:
            lo = center - 3.0 * (center - lo)
        if dist.support[1] == INF:
            hi = center + 3.0 * (hi - center)
    growth = [values[k + 1] / max(values[k], 1e-300) for k in range(3)]
    if sum(g > 2.0 for g in growth) >= 3:
        return DiagnosticValue(value=values[-1], flag="likely_infinite")
    return DiagnosticValue(value=values[-1], flag="finite")


def mismatch_trajectory(
    dist: Distribution1D, seq: GreedySequence, q: float
) -> np.ndarray:
    """N * e_q(first N points) for every level of a built 1-D sequence."""
    pts = np.asarray(seq.points, dtype=float).ravel()
    table = IntervalTable(dist, q)
    out = np.empty(len(pts))
    for i, a in enumerate(pts):
        table.insert(float(a))
        out[i] = (i + 1) * table.distortion()
    return out


@dataclass(frozen=True)
class RecursionBoundResult:
    sequence: np.ndarray
    fitted_k: float

    def scaled(self, rho: float) -> np.ndarray:
        n = np.arange(1, len(self.sequence) + 1)
        return self.sequence * n ** (1.0 / rho)


def recursion_bound_check(
    a1: float, c: float, rho: float, n_max: int
) -> RecursionBoundResult:
    """Generate the extremal sequence A_{N+1} = A_N - c*A_N^(1+rho) and fit
    the constant K = sup_N A_N * N^(1/rho) (finite by the recursion bound;
    the plateau of the scaled sequence is the fitted constant)."""
    if a1 <= 0.0 or c <= 0.0 or rho <= 0.0:
        raise ValueError("need a1 > 0, c > 0, rho > 0")
    if c * a1**rho >= 1.0:
        raise ValueError("need c * a1^rho < 1 so the sequence stays positive")
    seq = kernels.recursion_seq(a1, c, rho, int(n_max))
    if np.any(seq < 0.0):
        raise ValueError("sequence left the positive axis")
    n = np.arange(1, len(seq) + 1)
    fitted_k = float(np.max(seq * n ** (1.0 / rho)))
    return RecursionBoundResult(sequence=seq, fitted_k=fitted_k)
