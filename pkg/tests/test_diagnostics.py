import math

import numpy as np
import pytest

from greedyq.diagnostics import (
    maximal_function,
    maximal_function_integral,
    mismatch_trajectory,
    recursion_bound_check,
    zador_integral,
)
from greedyq.distributions import normal, uniform01
from greedyq.greedy1d import build_greedy_1d, build_greedy_symmetric


@pytest.fixture(scope="module")
def uniform_seq():
    return build_greedy_1d(uniform01(), n_max=64)


@pytest.fixture(scope="module")
def normal_seq():
    return build_greedy_symmetric(normal(0.0, 1.0), n_max=65)


# ---------------------------------------------------------------------------
# maximal function
# ---------------------------------------------------------------------------


def test_maximal_function_degenerate_at_first_point(uniform_seq):
    # xi on the first point: every level has d = 0, defined as 0
    assert maximal_function(uniform01(), uniform_seq, 0.25, 0.5, n_cap=1) == 0.0


def test_maximal_function_uniform_interior_ratio(uniform_seq):
    xi = 0.3117
    n_cap = 8
    got = maximal_function(uniform01(), uniform_seq, 0.25, xi, n_cap=n_cap)
    pts = uniform_seq.points[:n_cap]
    dmin = np.minimum.accumulate(np.abs(xi - pts))
    expected = 0.0
    for r in 0.25 * dmin[dmin > 0]:
        mass = min(xi + r, 1.0) - max(xi - r, 0.0)
        expected = max(expected, 2.0 * r / mass)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got >= 1.0


def test_maximal_function_normal_tail_matches_inverse_density(normal_seq):
    # small radii: 2r / mu(B(xi, r)) -> 1/phi(xi); at xi=3 that is ~225.6
    dist = normal(0.0, 1.0)
    got = maximal_function(dist, normal_seq, 0.01, 3.0)
    assert got == pytest.approx(1.0 / float(dist.pdf(3.0)), rel=0.05)


def test_maximal_function_zero_mass_ball_is_infinite(uniform_seq):
    # xi far outside the support: the ball misses [0,1] entirely
    assert math.isinf(maximal_function(uniform01(), uniform_seq, 0.25, 8.0))


def test_maximal_function_monotone_in_cap(uniform_seq):
    xi = 0.277
    vals = [
        maximal_function(uniform01(), uniform_seq, 0.25, xi, n_cap=n)
        for n in (1, 4, 16, 64)
    ]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_maximal_function_validates_b(uniform_seq):
    with pytest.raises(ValueError):
        maximal_function(uniform01(), uniform_seq, 0.7, 0.3)


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------


def test_maximal_integral_uniform_finite(uniform_seq):
    est = maximal_function_integral(uniform01(), uniform_seq, 0.25, 2.0 / 3.0, 64)
    assert est.flag == "finite"
    assert est.value >= 1.0  # Psi_b >= 1 on the interior of [0,1]


def test_maximal_integral_normal_finite(normal_seq):
    est = maximal_function_integral(
        normal(0.0, 1.0), normal_seq, 0.25, 2.0 / 3.0, 64
    )
    assert est.flag == "finite"
    assert est.value > 0.0


def test_maximal_integral_zero_exponent_is_one(uniform_seq):
    est = maximal_function_integral(uniform01(), uniform_seq, 0.25, 0.0, 32)
    assert est.value == pytest.approx(1.0, abs=1e-9)


def test_zador_integral_uniform_is_one():
    est = zador_integral(uniform01(), p=2.0, q=2.5)
    assert est.flag == "finite"
    assert est.value == pytest.approx(1.0, abs=1e-6)


def test_zador_integral_normal_below_critical_order():
    est = zador_integral(normal(0.0, 1.0), p=2.0, q=2.9)
    # Gaussian: int phi^(1/30) = (2 pi)^(-1/60) sqrt(60 pi)
    oracle = (2 * math.pi) ** (-1.0 / 60.0) * math.sqrt(60.0 * math.pi)
    assert est.flag == "finite"
    assert est.value == pytest.approx(oracle, rel=1e-6)


def test_zador_integral_normal_above_critical_order_flags():
    est = zador_integral(normal(0.0, 1.0), p=2.0, q=3.5)
    assert est.flag == "likely_infinite"


# ---------------------------------------------------------------------------
# mismatch
# ---------------------------------------------------------------------------


def test_mismatch_q_equals_p_matches_stored_trajectory(uniform_seq):
    scaled = mismatch_trajectory(uniform01(), uniform_seq, 2.0)
    levels = np.arange(1, len(uniform_seq) + 1)
    stored = levels * uniform_seq.distortions()
    assert np.allclose(scaled, stored, rtol=1e-12, atol=1e-15)


def test_mismatch_bounded_window_proxy(uniform_seq):
    for q in (2.5, 3.0):
        scaled = mismatch_trajectory(uniform01(), uniform_seq, q)
        early = scaled[5:13].max()
        late = scaled[31:].max()
        assert late <= 1.2 * early


# ---------------------------------------------------------------------------
# recursion bound
# ---------------------------------------------------------------------------


def test_recursion_first_terms():
    res = recursion_bound_check(1.0, 0.5, 1.0, 3)
    assert res.sequence.tolist() == [1.0, 0.5, 0.375]


def test_recursion_scaled_plateau():
    res = recursion_bound_check(1.0, 0.5, 1.0, 10**6)
    scaled = res.scaled(1.0)
    # A_N * N stays bounded and the fitted constant caps the sequence
    assert res.fitted_k <= 2.1
    assert np.all(scaled <= res.fitted_k + 1e-12)


def test_recursion_rho_two_bounded():
    res = recursion_bound_check(1.0, 0.1, 2.0, 10**5)
    assert math.isfinite(res.fitted_k)
    assert np.all(res.scaled(2.0) <= res.fitted_k + 1e-12)


def test_recursion_fitted_k_stable_between_caps():
    k5 = recursion_bound_check(1.0, 0.5, 1.0, 10**5).fitted_k
    k6 = recursion_bound_check(1.0, 0.5, 1.0, 10**6).fitted_k
    assert abs(k6 - k5) / k5 < 0.01


def test_recursion_rejects_bad_parameters():
    with pytest.raises(ValueError):
        recursion_bound_check(-1.0, 0.5, 1.0, 10)
    with pytest.raises(ValueError):
        recursion_bound_check(1.0, 1.5, 1.0, 10)  # C * A1^rho >= 1
