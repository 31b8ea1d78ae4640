import math

import numpy as np
import pytest

from greedyq import qmc
from greedyq.distributions import normal, uniform01
from greedyq.quantization import Quantizer, distortion_exact_1d


def test_vdc_base2_first_terms():
    assert qmc.vdc(2, 4).tolist() == [0.5, 0.25, 0.75, 0.125]


def test_vdc_base3_first_term():
    assert qmc.vdc(3, 1)[0] == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_vdc_rejects_bad_args():
    with pytest.raises(ValueError):
        qmc.vdc(1, 5)
    with pytest.raises(ValueError):
        qmc.vdc(2, 0)


def test_halton_uses_first_primes():
    pts = qmc.halton(3, 4)
    assert pts.shape == (4, 3)
    assert pts[0] == pytest.approx([0.5, 1.0 / 3.0, 0.2])
    assert pts[1] == pytest.approx([0.25, 2.0 / 3.0, 0.4])


def test_low_discrepancy_spec_dispatch():
    spec = qmc.LowDiscrepancySpec(kind="vdc", param=2, count=3)
    assert spec.generate().tolist() == [0.5, 0.25, 0.75]
    spec = qmc.LowDiscrepancySpec(kind="halton", param=2, count=2)
    assert spec.generate().shape == (2, 2)
    with pytest.raises(ValueError):
        qmc.LowDiscrepancySpec(kind="sobol", param=2, count=2).generate()


# ---------------------------------------------------------------------------
# star discrepancy
# ---------------------------------------------------------------------------


def test_star_discrepancy_examples():
    assert qmc.star_discrepancy_1d([0.5]) == pytest.approx(0.5, abs=1e-15)
    assert qmc.star_discrepancy_1d([0.25, 0.75]) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 16])
def test_star_discrepancy_optimal_grid(n):
    assert qmc.star_discrepancy_1d(qmc.optimal_uniform_grid(n)) == pytest.approx(
        1.0 / (2.0 * n), abs=1e-14
    )


def test_star_discrepancy_rejects_outside_unit():
    with pytest.raises(ValueError):
        qmc.star_discrepancy_1d([0.2, 1.4])


def test_star_discrepancy_nd_grid_estimate():
    # 2x2 product grid of midpoints: D* = 1/4 + ... scan approximation is
    # sandwiched between the 1-d projections and 1
    pts = np.array([[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])
    est = qmc.star_discrepancy_nd(pts)
    assert 0.25 <= est <= 0.6


def test_vdc_low_discrepancy_rate():
    # D*_N <= C (1 + log N) / N for a modest fitted constant C
    for n_pow in range(4, 15):
        n = 1 << n_pow
        dstar = qmc.star_discrepancy_1d(qmc.vdc(2, n))
        assert dstar <= 1.5 * (1.0 + math.log(n)) / n


# ---------------------------------------------------------------------------
# quantization constants and concatenated sequences
# ---------------------------------------------------------------------------


def test_vdc_constants_scaled_value_at_2():
    traj = qmc.vdc_quantization_constants(1.0, 16)
    assert traj.scaled[1] == pytest.approx(11.0 / 32.0, abs=1e-13)


def test_vdc_constants_requires_minimum_length():
    with pytest.raises(ValueError):
        qmc.vdc_quantization_constants(1.0, 4)


def test_vdc_liminf_approach_is_monotone_from_above():
    # N e_1 at N = 2^(n-1) decreases toward 1/4 for n = 6..12
    traj = qmc.vdc_quantization_constants(1.0, 1 << 12)
    vals = [traj.scaled[(1 << (n - 1)) - 1] for n in range(6, 13)]
    diffs = np.diff(vals)
    assert np.all(diffs < 0.0)
    assert vals[-1] == pytest.approx(0.25, abs=0.002)


def test_concatenated_blocks_are_optimal_grids():
    b = qmc.concatenated_sequence(n_levels=3)
    assert b[0] == 0.5
    assert b[1:3].tolist() == [0.25, 0.75]
    assert b[3:7].tolist() == [0.125, 0.375, 0.625, 0.875]


def test_concatenated_rejects_other_laws():
    with pytest.raises(ValueError):
        qmc.concatenated_sequence(dist=normal(0.0, 1.0), n_levels=3)


def test_concatenated_scaled_error_bounds():
    pts = qmc.concatenated_sequence(n_levels=10)
    scaled = qmc.scaled_error_trajectory(pts, 2.0)
    assert scaled.max() <= 2.0 * qmc.J_2_1 + 1e-12
    assert np.all(scaled[63:] >= qmc.J_2_1 * 0.98)


def test_concatenated_distortion_non_increasing():
    pts = qmc.concatenated_sequence(n_levels=8)
    scaled = qmc.scaled_error_trajectory(pts, 2.0)
    levels = np.arange(1, len(scaled) + 1)
    e = scaled / levels
    assert np.all(np.diff(e) <= 1e-15)


# ---------------------------------------------------------------------------
# Proinov / Koksma-Hlawka style checks
# ---------------------------------------------------------------------------


def test_proinov_midpoint_exact_for_identity():
    chk = qmc.proinov_bound_check([0.5], lambda x: x, 1.0)
    assert chk.lhs == pytest.approx(0.0, abs=1e-14)
    assert chk.rhs == pytest.approx(0.5, abs=1e-14)
    assert chk.bound_holds


def test_proinov_vdc_two_points():
    chk = qmc.proinov_bound_check(qmc.vdc(2, 2), lambda x: x, 1.0)
    assert chk.e1 == pytest.approx(11.0 / 64.0, abs=1e-13)
    assert chk.dstar == pytest.approx(0.5, abs=1e-15)
    assert chk.domination_holds


def test_proinov_square_on_optimal_grid():
    chk = qmc.proinov_bound_check(qmc.optimal_uniform_grid(4), lambda x: x * x, 1.0)
    assert chk.lhs == pytest.approx(1.0 / 192.0, abs=1e-13)
    assert chk.rhs == pytest.approx(1.0 / 8.0, abs=1e-14)
    assert chk.bound_holds


@pytest.mark.parametrize("n", [1, 3, 10, 64, 257, 1024])
def test_e1_dominated_by_star_discrepancy(n):
    pts = qmc.vdc(2, n)
    e1 = distortion_exact_1d(uniform01(), Quantizer(pts), 1.0).value
    assert e1 <= qmc.star_discrepancy_1d(pts) + 1e-12
