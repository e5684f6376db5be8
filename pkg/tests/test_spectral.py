import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from illposed.core import DomainError, svd
from illposed.spectral import (
    classify_illposedness,
    damped_svd_solve,
    filter_factors,
    picard_table,
    residual_and_norm,
    tikhonov_svd_solve,
    tsvd_solve,
)
from illposed.solvers import naive_solve, tikhonov_classic


def shaw_like(n=32):
    """Severely ill-conditioned smooth kernel (discretized Gaussian integral operator)."""
    t = (np.arange(n) + 0.5) / n
    return np.exp(-((t[:, None] - t[None, :]) ** 2) / 0.02) / n


def test_picard_identity():
    tab = picard_table(svd(np.eye(4)), np.ones(4))
    assert np.allclose(tab.coeff, 1) and np.allclose(tab.ratio, 1)
    assert [r[0] for r in tab.rows()] == [1, 2, 3, 4]


def test_picard_noiseless_ratios_stay_bounded():
    A = shaw_like()
    f = svd(A)
    # x_true built from the leading singular vectors with decaying weights
    x = f.V[:, :8] @ (1.0 / np.arange(1, 9))
    tab = picard_table(f, A @ x)
    assert np.all(tab.ratio[:8] <= 1.0 + 1e-8)
    assert np.linalg.norm(tab.ratio[:8]) <= 1.5 * np.linalg.norm(x)


def test_picard_noisy_coefficients_plateau_at_noise_level():
    A = shaw_like(64)
    f = svd(A)
    x = f.V[:, :5] @ np.ones(5)
    std = 1e-4
    y = A @ x + np.random.default_rng(0).normal(0, std, 64)
    tail = picard_table(f, y).coeff[30:]
    assert 0.3 * std < np.median(tail) < 3 * std


def test_picard_dimension_mismatch():
    with pytest.raises(ValueError):
        picard_table(svd(np.eye(3)), np.ones(4))


@pytest.mark.parametrize("sig,regime", [(lambda i: i**-0.5, "mild"), (lambda i: i**-2.0, "moderate"),
                                        (lambda i: np.exp(-i), "severe")])
def test_classification(sig, regime):
    c = classify_illposedness(sig(np.arange(1, 31, dtype=float)))
    assert c.regime == regime


def test_classification_alpha_estimate():
    c = classify_illposedness(np.arange(1, 51, dtype=float) ** -0.5)
    assert abs(c.alpha_hat - 0.5) <= 0.05


def test_classification_needs_eight_values():
    with pytest.raises(DomainError):
        classify_illposedness([1, 0.5, 0.2, 0.1, 0.0])


def test_tsvd_hand_example():
    x = tsvd_solve(svd(np.diag([2.0, 1.0])), [4.0, 3.0], 1)
    assert np.allclose(x, [2, 0])


def test_tsvd_full_rank_equals_pinv():
    A = np.random.default_rng(1).standard_normal((12, 6))
    y = np.random.default_rng(2).standard_normal(12)
    ref = np.linalg.solve(A.T @ A, A.T @ y)
    assert np.abs(tsvd_solve(svd(A), y, 6) - ref).max() <= 1e-8


def test_tsvd_range_and_factors():
    f = svd(np.diag([3.0, 2.0, 0.0]))
    with pytest.raises(DomainError):
        tsvd_solve(f, np.ones(3), 3)
    with pytest.raises(DomainError):
        tsvd_solve(f, np.ones(3), 0)
    assert np.array_equal(filter_factors([3, 2, 1, 0.5], kind="tsvd", k=2), [1, 1, 0, 0])


def test_tsvd_norm_non_decreasing_in_k():
    A = shaw_like()
    f = svd(A)
    y = A @ np.sin(np.linspace(0, 3, 32)) + 1e-5 * np.random.default_rng(3).standard_normal(32)
    norms = [np.linalg.norm(tsvd_solve(f, y, k)) for k in range(1, f.rank() + 1)]
    assert np.all(np.diff(norms) >= -1e-12)


def test_filter_factor_examples():
    s = np.array([4.0, 1.0, 0.01])
    assert np.array_equal(filter_factors(s, 0.0), np.ones(3))
    assert filter_factors([2.0], 2.0)[0] == 0.5
    lam = 1.0
    small = np.array([0.05, 0.01, 1e-4])
    assert np.all(np.abs(filter_factors(small, lam) / (small**2 / lam**2) - 1) <= 0.01)
    assert np.allclose(filter_factors(s, 1.0, "damped"), s / (s + 1))
    with pytest.raises(DomainError):
        filter_factors(s, -1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=10), st.floats(0, 1e3),
       st.sampled_from(["tikhonov", "damped"]))
def test_filter_factors_in_unit_interval(sig, lam, kind):
    phi = filter_factors(sorted(sig, reverse=True), lam, kind)
    assert np.all((phi >= 0) & (phi <= 1))


def test_filter_factors_survive_underflow_and_zero_sigma():
    # sigma^2 / (sigma^2 + lam^2) with lam / sigma = 1e100 is 1e-200, not 0/0
    phi = filter_factors([1.0, 1e-300, 0.0], 1e-200)
    assert phi[0] == 1.0 and phi[2] == 0.0
    assert np.isclose(phi[1], 1e-200, rtol=1e-12, atol=0)
    assert np.array_equal(filter_factors([2.0, 0.0], 1e-200, "damped"), [1.0, 0.0])


def test_tikhonov_svd_scalar():
    assert np.isclose(tikhonov_svd_solve(svd([[1.0]]), [1.0], 1.0)[0], 0.5)


def test_tikhonov_svd_small_lambda_is_naive_solve():
    A = np.random.default_rng(4).standard_normal((8, 8)) + 4 * np.eye(8)
    y = np.random.default_rng(5).standard_normal(8)
    assert np.abs(tikhonov_svd_solve(svd(A), y, 1e-6) - naive_solve(A, y)).max() <= 1e-6


def test_tikhonov_svd_matches_normal_equations():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((20, 20))
    y = rng.standard_normal(20)
    ref = tikhonov_classic(A, y, 0.7)
    assert np.abs(tikhonov_svd_solve(svd(A), y, 0.7) - ref).max() <= 1e-8
    assert np.allclose(ref, np.linalg.solve(A.T @ A + 0.49 * np.eye(20), A.T @ y))


def test_damped_solution_is_between_tikhonov_and_naive():
    f = svd(np.diag([1.0, 0.1]))
    x = damped_svd_solve(f, [1.0, 1.0], 0.1)
    assert np.allclose(x, [1 / 1.1, 5.0])


def test_monotone_norms_in_lambda():
    A = shaw_like()
    f = svd(A)
    y = A @ np.cos(np.linspace(0, 2, 32)) + 1e-4 * np.random.default_rng(7).standard_normal(32)
    lams = np.logspace(-6, 0, 20)
    pairs = [residual_and_norm(f, y, filter_factors(f.sigmas, l)) for l in lams]
    res, sol = np.array(pairs).T
    assert np.all(np.diff(sol) <= 1e-12 * sol.max())
    assert np.all(np.diff(res) >= -1e-12 * res.max())
    # agrees with the explicit solve
    x = tikhonov_svd_solve(f, y, lams[7])
    assert np.isclose(res[7], np.linalg.norm(A @ x - y), rtol=1e-8)
    assert np.isclose(sol[7], np.linalg.norm(x), rtol=1e-8)


def test_tikhonov_svd_linear_in_y():
    A = shaw_like(16)
    f = svd(A)
    rng = np.random.default_rng(8)
    u, v = rng.standard_normal(16), rng.standard_normal(16)
    lhs = tikhonov_svd_solve(f, 2 * u - 3 * v, 0.01)
    rhs = 2 * tikhonov_svd_solve(f, u, 0.01) - 3 * tikhonov_svd_solve(f, v, 0.01)
    assert np.allclose(lhs, rhs, atol=1e-9)
