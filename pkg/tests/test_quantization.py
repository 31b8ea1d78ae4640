import math

import numpy as np
import pytest

from greedyq import _kernels as kernels
from greedyq.distributions import (
    exponential,
    normal,
    normal_nd,
    uniform01,
    uniform_nd,
    wrap_1d,
)
from greedyq.quantization import (
    IntervalTable,
    Quantizer,
    cubature,
    distortion_exact_1d,
    distortion_mc,
    distortion_trajectory,
    nearest,
    nearest_indices,
    read_grid_csv,
    voronoi_weights,
    write_grid_csv,
)
from greedyq.seeding import rng_for

J_2_1 = 1.0 / (2.0 * math.sqrt(3.0))


def optimal_grid(n):
    return (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)


# ---------------------------------------------------------------------------
# nearest
# ---------------------------------------------------------------------------


def test_nearest_single_point():
    idx, dist = nearest(Quantizer([0.5]), 0.3)
    assert idx == 0
    assert dist == pytest.approx(0.2, abs=1e-15)


def test_nearest_tie_breaks_to_smallest_index():
    idx, dist = nearest(Quantizer([0.25, 0.5]), 0.375)
    assert idx == 0
    assert dist == pytest.approx(0.125, abs=1e-15)
    # order reversed: the tie still goes to the first listed point
    idx2, _ = nearest(Quantizer([0.5, 0.25]), 0.375)
    assert idx2 == 0


def test_nearest_2d():
    idx, dist = nearest(Quantizer([[0.0, 0.0], [1.0, 1.0]]), np.array([0.9, 0.9]))
    assert idx == 1
    assert dist == pytest.approx(math.hypot(0.1, 0.1), abs=1e-12)


def test_nearest_dimension_mismatch():
    with pytest.raises(ValueError):
        nearest(Quantizer([[0.0, 0.0]]), np.array([1.0, 2.0, 3.0]))


def test_nearest_matches_linear_scan_1d_queries():
    rng = rng_for(3, 0)
    pts = rng.random(700)
    q = Quantizer(pts)
    queries = rng.random(1000)
    idx, dist = nearest_indices(q, queries)
    ref_idx, ref_dist = kernels.nearest(pts[:, None], queries[:, None])
    assert np.array_equal(idx, ref_idx)
    assert np.allclose(dist, ref_dist, atol=0.0)


def test_nearest_kdtree_path_matches_linear_scan():
    rng = rng_for(4, 0)
    pts = rng.random((700, 3))  # > 512 points: kd-tree path
    q = Quantizer(pts)
    queries = rng.random((1000, 3))
    idx, _ = nearest_indices(q, queries)
    ref_idx, _ = kernels.nearest(pts, queries)
    assert np.array_equal(idx, ref_idx)


def test_quantizer_rejects_duplicates():
    with pytest.raises(ValueError):
        Quantizer([0.2, 0.2, 0.5])
    with pytest.raises(ValueError):
        Quantizer([[1.0, 2.0], [1.0, 2.0]])


# ---------------------------------------------------------------------------
# exact 1-D distortion
# ---------------------------------------------------------------------------


def test_distortion_uniform_midpoint_p1():
    rec = distortion_exact_1d(uniform01(), Quantizer([0.5]), 1.0)
    assert rec.value == pytest.approx(0.25, abs=1e-14)
    assert rec.method == "exact1d"
    assert rec.std_error == 0.0


def test_distortion_uniform_two_points_p1():
    rec = distortion_exact_1d(uniform01(), Quantizer([0.25, 0.5]), 1.0)
    assert rec.value == pytest.approx(11.0 / 64.0, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 7, 24, 256])
def test_distortion_optimal_grid_p2(n):
    rec = distortion_exact_1d(uniform01(), Quantizer(optimal_grid(n)), 2.0)
    assert n * rec.value == pytest.approx(J_2_1, rel=1e-9)


def test_distortion_monotone_in_grid():
    dist = normal(0.0, 1.0)
    pts = [0.0, 1.0, -0.7, 0.4]
    vals = distortion_trajectory(dist, pts, 2.0)
    assert np.all(np.diff(vals) < 0.0)


def test_distortion_monotone_in_p():
    dist = exponential(1.0)
    q = Quantizer([0.4, 1.5])
    e1 = distortion_exact_1d(dist, q, 1.0).value
    e2 = distortion_exact_1d(dist, q, 2.0).value
    e3 = distortion_exact_1d(dist, q, 3.0).value
    assert e1 <= e2 + 1e-12
    assert e2 <= e3 + 1e-12


def test_interval_table_matches_oneshot():
    dist = normal(0.0, 1.0)
    pts = [0.0, 1.3, -0.8, 0.5, 2.4, -2.2]
    table = IntervalTable(dist, 2.0, pts)
    rec = distortion_exact_1d(dist, Quantizer(pts), 2.0)
    assert table.distortion() == pytest.approx(rec.value, rel=1e-13)


def test_interval_table_general_p_matches_adaptive_quadrature():
    dist = uniform01()
    pts = [0.5, 0.17, 0.83, 0.4]
    table = IntervalTable(dist, 2.5, pts)
    rec = distortion_exact_1d(dist, Quantizer(pts), 2.5)
    assert table.distortion() == pytest.approx(rec.value, abs=1e-9)


def test_distortion_mc_vs_exact_20_random_grids():
    rng = rng_for(11, 0)
    cases = [
        (uniform01(), wrap_1d(uniform01())),
        (normal(0.0, 1.0), wrap_1d(normal(0.0, 1.0))),
        (exponential(1.0), wrap_1d(exponential(1.0))),
    ]
    checked = 0
    for trial in range(20):
        dist, nd = cases[trial % len(cases)]
        n_pts = int(rng.integers(1, 8))
        pts = np.unique(dist.quantile(rng.random(n_pts) * 0.9 + 0.05))
        q = Quantizer(pts)
        exact = distortion_exact_1d(dist, q, 2.0)
        mc = distortion_mc(nd, q, 2.0, samples=40_000, seed=1000 + trial)
        assert abs(mc.value - exact.value) <= 5.0 * mc.std_error
        checked += 1
    assert checked == 20


def test_distortion_mc_whole_plane_cell():
    rec = distortion_mc(normal_nd(2), Quantizer([[0.0, 0.0]]), 2.0, 200_000, seed=7)
    assert abs(rec.value - math.sqrt(2.0)) <= 5.0 * rec.std_error


def test_distortion_mc_covering_grid_is_zero():
    # law concentrated on two atoms that are both grid points
    class TwoPoint:
        dim = 1
        name = "two_atoms"
        mean = np.array([0.5])

        @staticmethod
        def sampler(rng, n):
            return np.where(rng.random((n, 1)) < 0.5, 0.25, 0.75)

    rec = distortion_mc(TwoPoint(), Quantizer([0.25, 0.75]), 2.0, 5000, seed=3)
    assert rec.value == 0.0
    assert rec.std_error == 0.0


# ---------------------------------------------------------------------------
# Voronoi weights and cubature
# ---------------------------------------------------------------------------


def test_voronoi_weights_symmetric_pair():
    w = voronoi_weights(wrap_1d(uniform01()), Quantizer([0.25, 0.75]), 100_000, seed=5)
    se = math.sqrt(0.25 / w.estimation_samples)
    assert w.weights[0] == pytest.approx(0.5, abs=5 * se)
    assert w.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_voronoi_weights_third_split():
    w = voronoi_weights(wrap_1d(uniform01()), Quantizer([0.5, 5.0 / 6.0]), 100_000, seed=6)
    se = math.sqrt(2.0 / 9.0 / w.estimation_samples)
    assert w.weights[0] == pytest.approx(2.0 / 3.0, abs=5 * se)


def test_voronoi_weights_single_point():
    w = voronoi_weights(wrap_1d(normal(0.0, 1.0)), Quantizer([0.0]), 1000, seed=8)
    assert w.weights[0] == 1.0


def test_cubature_constant_is_one():
    q = Quantizer([0.1, 0.4, 0.9])
    assert cubature(lambda x: 1.0, q) == pytest.approx(1.0, abs=1e-15)


def test_cubature_identity_symmetric_grid():
    q = Quantizer([0.25, 0.75])
    assert cubature(lambda x: x, q, np.array([0.5, 0.5])) == pytest.approx(0.5)


def test_cubature_square_on_optimal_grid():
    q = Quantizer(optimal_grid(4))
    val = cubature(lambda x: x * x, q)
    assert val == pytest.approx(21.0 / 64.0, abs=1e-14)
    assert abs(val - 1.0 / 3.0) == pytest.approx(1.0 / 192.0, abs=1e-14)


def test_cubature_weight_length_mismatch():
    with pytest.raises(ValueError):
        cubature(lambda x: x, Quantizer([0.1, 0.9]), np.array([1.0]))


# ---------------------------------------------------------------------------
# grid CSV
# ---------------------------------------------------------------------------


def test_grid_csv_roundtrip(tmp_path):
    q = Quantizer(rng_for(1, 2).random((37, 2)))
    path = tmp_path / "grid.csv"
    write_grid_csv(path, q)
    back = read_grid_csv(path)
    assert np.array_equal(back.points, q.points)
    assert open(path).readline().strip() == "x1,x2"


def test_grid_csv_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_grid_csv(path)
