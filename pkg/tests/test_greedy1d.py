import math

import numpy as np
import pytest

from greedyq.distributions import (
    dirac,
    exponential,
    halfnormal,
    normal,
    restricted_centroid,
    uniform01,
)
from greedyq.greedy1d import (
    CurvatureLossError,
    SolverDivergedError,
    build_greedy_1d,
    build_greedy_symmetric,
    forgy_curvature,
    forgy_newton,
    inertia_table,
    lloyd_fixed_point,
    replay_trajectory,
)
from greedyq.seeding import rng_for

INF = math.inf

# frozen from a 1e5-point refined grid search of E(X^2 ^ (X-a)^2 | X >= 0)
HALF_NORMAL_FIRST_POINT = 1.2240063376


# ---------------------------------------------------------------------------
# inertia table
# ---------------------------------------------------------------------------


def test_inertia_uniform_single_point():
    t = inertia_table(uniform01(), [0.5])
    assert t.sigma2 == pytest.approx([1.0 / 24.0, 1.0 / 24.0], abs=1e-14)
    assert t.argmax_index == 0  # tie resolves to the smallest index


def test_inertia_normal_symmetric_tie():
    t = inertia_table(normal(0.0, 1.0), [0.0])
    assert t.sigma2[0] == pytest.approx(t.sigma2[1], abs=1e-14)
    assert t.argmax_index == 0


def test_inertia_uniform_two_points_left_interval_dominates():
    t = inertia_table(uniform01(), [0.5, 5.0 / 6.0])
    # exact piecewise integrals: 1/24, 1/324, 1/648
    assert t.sigma2 == pytest.approx(
        [1.0 / 24.0, 1.0 / 324.0, 1.0 / 648.0], abs=1e-14
    )
    assert t.argmax_index == 0


def test_inertia_sums_to_squared_distortion():
    from greedyq.quantization import Quantizer, distortion_exact_1d

    pts = [0.1, 0.45, 0.9, 0.7]
    t = inertia_table(uniform01(), pts)
    e2 = distortion_exact_1d(uniform01(), Quantizer(pts), 2.0).value
    assert t.sigma2.sum() == pytest.approx(e2 * e2, abs=1e-10)


# ---------------------------------------------------------------------------
# Lloyd fixed point
# ---------------------------------------------------------------------------


def test_lloyd_uniform_right_interval():
    a, iters, residual = lloyd_fixed_point(uniform01(), 0.5, INF, start=0.7)
    assert a == pytest.approx(5.0 / 6.0, abs=1e-11)
    assert residual <= 1e-12


def test_lloyd_whole_line_is_mean_in_one_step():
    a, iters, _ = lloyd_fixed_point(normal(0.0, 1.0), -INF, INF, start=1.7)
    assert a == pytest.approx(0.0, abs=1e-14)
    assert iters <= 2


def test_lloyd_halfnormal_active_endpoint_matches_grid_search():
    a, _, _ = lloyd_fixed_point(halfnormal(), 0.0, INF, start=1.0)
    assert a == pytest.approx(HALF_NORMAL_FIRST_POINT, abs=1e-6)


def test_lloyd_requires_interior_start():
    with pytest.raises(ValueError):
        lloyd_fixed_point(uniform01(), 0.5, 1.0, start=0.5)


def test_lloyd_divergence_error_carries_iterate():
    with pytest.raises(SolverDivergedError) as err:
        lloyd_fixed_point(uniform01(), 0.5, INF, start=0.7, tol=0.0, max_iter=3)
    assert 0.5 < err.value.last_iterate < 1.0
    assert err.value.residual >= 0.0


def test_lloyd_iterates_stay_in_interval():
    # interval stability: every iterate stays inside (left, right)
    dist = exponential(1.0)
    left, right = 0.4, 2.0
    a = 0.5
    for _ in range(60):
        lb = (left + a) / 2.0
        rb = (a + right) / 2.0
        a = restricted_centroid(dist, lb, rb)
        assert left < a < right


@pytest.mark.parametrize(
    "dist", [uniform01(), normal(0.0, 1.0), exponential(1.0)], ids=lambda d: d.name
)
def test_lloyd_unique_fixed_point_5_random_starts(dist):
    rng = rng_for(21, 0)
    seq = build_greedy_1d(dist, n_max=10)
    for level in range(2, 11):
        from greedyq.quantization import IntervalTable

        table = IntervalTable(dist, 2.0, seq.points[: level - 1])
        i0 = table.argmax_interval()
        left, right = table.interval_bounds(i0)
        lo = max(left, dist.support[0])
        hi = min(right, dist.support[1])
        span_lo = lo if math.isfinite(lo) else hi - 3.0
        span_hi = hi if math.isfinite(hi) else lo + 3.0
        targets = []
        for _ in range(5):
            start = span_lo + (span_hi - span_lo) * (0.05 + 0.9 * rng.random())
            a, _, _ = lloyd_fixed_point(dist, left, right, start)
            targets.append(a)
        assert np.ptp(targets) <= 1e-8


# ---------------------------------------------------------------------------
# Forgy / Newton
# ---------------------------------------------------------------------------


def test_forgy_curvature_printed_formula():
    # mass of [2/3, 11/12] + (5/6-1/2)/2 * f(2/3) + (1-5/6)/2 * f(11/12)
    rho = forgy_curvature(uniform01(), 5.0 / 6.0, 0.5, 1.0)
    assert rho == pytest.approx(0.5, abs=1e-14)


def test_forgy_agrees_with_lloyd_on_uniform_cell():
    a_forgy, _, _ = forgy_newton(uniform01(), 0.5, INF, start=0.7)
    a_lloyd, _, _ = lloyd_fixed_point(uniform01(), 0.5, INF, start=0.7)
    assert a_forgy == pytest.approx(5.0 / 6.0, abs=1e-8)
    assert abs(a_forgy - a_lloyd) <= 1e-8


def test_forgy_normal_whole_line():
    a, _, _ = forgy_newton(normal(0.0, 1.0), -INF, INF, start=1.2)
    assert a == pytest.approx(0.0, abs=1e-9)


def test_forgy_needs_density():
    with pytest.raises(ValueError, match="density"):
        forgy_newton(dirac(0.3), -INF, INF, start=0.5)


def test_forgy_custom_step_schedule():
    a, _, _ = forgy_newton(
        uniform01(), 0.5, INF, start=0.7, steps=lambda n: 1.0 / math.sqrt(n)
    )
    assert a == pytest.approx(5.0 / 6.0, abs=1e-8)


@pytest.mark.parametrize(
    "dist", [uniform01(), normal(0.0, 1.0), exponential(1.0)], ids=lambda d: d.name
)
def test_lloyd_forgy_agree_across_catalogue(dist):
    from greedyq.quantization import IntervalTable

    seq = build_greedy_1d(dist, n_max=12)
    rng = rng_for(31, 0)
    for level in (3, 6, 9, 12):
        table = IntervalTable(dist, 2.0, seq.points[: level - 1])
        i0 = table.argmax_interval()
        left, right = table.interval_bounds(i0)
        lo = max(left, dist.support[0])
        hi = min(right, dist.support[1])
        start = restricted_centroid(dist, lo, hi)
        a_l, _, _ = lloyd_fixed_point(dist, left, right, start)
        a_f, _, _ = forgy_newton(dist, left, right, start)
        assert abs(a_l - a_f) <= 1e-8


# ---------------------------------------------------------------------------
# full builder
# ---------------------------------------------------------------------------


def test_build_uniform_first_three_points():
    seq = build_greedy_1d(uniform01(), n_max=3)
    assert seq.points[0] == pytest.approx(0.5, abs=1e-14)
    assert sorted(seq.points[1:]) == pytest.approx(
        [1.0 / 6.0, 5.0 / 6.0], abs=1e-10
    )


def test_build_rejects_general_p():
    with pytest.raises(ValueError):
        build_greedy_1d(uniform01(), n_max=3, p=1.5)


def test_build_dirac_degenerate_support():
    seq = build_greedy_1d(dirac(0.3), n_max=5)
    assert seq.points[0] == pytest.approx(0.3)
    assert len(seq) == 1  # support exhausted after the first point
    assert seq.trajectory[-1].value == 0.0


def test_build_strict_decrease_and_stationarity():
    seq = build_greedy_1d(exponential(1.0), n_max=120)
    vals = seq.distortions()
    assert np.all(np.diff(vals) < 0.0)
    assert seq.residuals.max() <= 1e-9


def test_build_points_inside_support():
    seq = build_greedy_1d(uniform01(), n_max=60)
    assert np.all((seq.points >= 0.0) & (seq.points <= 1.0))


def test_build_cell_mass_positive():
    # estimated mass of the open cell of the newest point stays positive
    dist = normal(0.0, 1.0)
    seq = build_greedy_1d(dist, n_max=25)
    rng = rng_for(41, 0)
    x = np.asarray(dist.quantile(rng.random(100_000)))
    for level in (5, 12, 25):
        pts = seq.points[:level]
        d = np.abs(x[:, None] - pts[None, :])
        hits = np.sum(d.argmin(axis=1) == level - 1)
        assert hits >= 1


def test_solver_errors_carry_level():
    with pytest.raises(SolverDivergedError, match="level 2"):
        build_greedy_1d(uniform01(), n_max=3, tol=-1.0)  # unsatisfiable tol


def test_replay_matches_builder_trajectory():
    seq = build_greedy_1d(uniform01(), n_max=40)
    records, residuals = replay_trajectory(uniform01(), seq.points, 2.0)
    replay_vals = np.array([r.value for r in records])
    assert np.allclose(replay_vals, seq.distortions(), rtol=1e-13, atol=0.0)
    assert residuals.max() <= 1e-9


# ---------------------------------------------------------------------------
# symmetric builder
# ---------------------------------------------------------------------------


def test_symmetric_first_point_origin():
    seq = build_greedy_symmetric(normal(0.0, 1.0), n_max=7)
    assert seq.points[0] == 0.0


def test_symmetric_mirror_pairs():
    seq = build_greedy_symmetric(normal(0.0, 1.0), n_max=9)
    pts = seq.points
    assert pts[1] == -pts[2] and pts[3] == -pts[4] and pts[5] == -pts[6]
    assert pts[1] == pytest.approx(HALF_NORMAL_FIRST_POINT, abs=1e-6)


def test_symmetric_rejects_asymmetric_law():
    with pytest.raises(ValueError, match="symmetric"):
        build_greedy_symmetric(exponential(1.0), n_max=5)


def test_symmetric_trajectory_strictly_decreasing():
    seq = build_greedy_symmetric(normal(0.0, 1.0), n_max=41)
    assert np.all(np.diff(seq.distortions()) < 0.0)
    assert seq.residuals.max() <= 1e-9
