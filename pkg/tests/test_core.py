import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from illposed.core import (
    DomainError,
    SingularityError,
    condition_number,
    lp_norm,
    pinv_left,
    pinv_right,
    svd,
)
from illposed.operators import conv_matrix, psf_build

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_lp_norm_examples():
    assert lp_norm([3, 4], 2) == 5.0
    assert lp_norm([1, -2, 3], 1) == 6.0
    assert lp_norm([0, 5, 0, -1], 0) == 2.0
    assert lp_norm([1, -7, 3], np.inf) == 7.0
    # quasi-norm uses the same formula
    assert np.isclose(lp_norm([1, 1], 0.5), 4.0)


def test_lp_norm_zero_count_threshold():
    assert lp_norm([1e-13, -1e-11, 0.0], 0) == 1.0


@pytest.mark.parametrize("p", [-1, float("nan")])
def test_lp_norm_rejects_bad_p(p):
    with pytest.raises(DomainError):
        lp_norm([1, 2], p)


def test_lp_norm_rejects_non_finite():
    with pytest.raises(DomainError):
        lp_norm([1, np.inf], 2)


@settings(max_examples=60, deadline=None)
@given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite), finite,
       st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]))
def test_lp_norm_is_a_norm_for_p_at_least_one(u, v, c, p):
    assert lp_norm(u + v, p) <= lp_norm(u, p) + lp_norm(v, p) + 1e-10 * (1 + lp_norm(u, p) + lp_norm(v, p))
    assert np.isclose(lp_norm(c * u, p), abs(c) * lp_norm(u, p), rtol=1e-10, atol=1e-10)


def test_svd_identity_and_diagonal():
    assert np.allclose(svd(np.eye(3)).sigmas, [1, 1, 1])
    assert np.allclose(svd(np.diag([3.0, 1.0])).sigmas, [3, 1])


def test_svd_invariants_random():
    A = np.random.default_rng(42).standard_normal((5, 3))
    f = svd(A)
    assert np.abs(f.U.T @ f.U - np.eye(5)).max() <= 1e-10
    assert np.abs(f.Vt @ f.Vt.T - np.eye(3)).max() <= 1e-10
    assert np.all(np.diff(f.sigmas) <= 0)
    # direct multiplication oracle
    S = np.zeros((5, 3))
    S[:3, :3] = np.diag(f.sigmas)
    assert np.linalg.norm(A - f.U @ S @ f.Vt) / np.linalg.norm(A) <= 1e-10


def test_svd_sign_convention():
    A = np.random.default_rng(3).standard_normal((6, 4))
    f = svd(A)
    idx = np.argmax(np.abs(f.U), axis=0)
    assert np.all(f.U[idx, np.arange(6)] > 0)
    assert np.allclose(f.reconstruct(), A)


def test_svd_rejects_non_finite():
    with pytest.raises(DomainError):
        svd([[1.0, np.nan], [0.0, 1.0]])


@settings(max_examples=25, deadline=None)
@given(arrays(float, (4, 3), elements=finite))
def test_svd_of_transpose_has_same_sigmas(A):
    s1 = svd(A).sigmas
    s2 = svd(A.T).sigmas
    assert np.allclose(s1, s2, atol=1e-10 * max(1.0, s1.max(initial=0)))


def test_condition_number_examples():
    assert condition_number(np.eye(4)) == 1.0
    assert np.isclose(condition_number(np.diag([10.0, 1e-3]), 1e-12), 1e4)
    with pytest.raises(DomainError):
        condition_number(np.zeros((3, 3)))


def test_condition_number_ignores_values_below_tolerance():
    assert np.isclose(condition_number(np.diag([1.0, 0.5, 1e-20])), 2.0)


def test_condition_grows_with_blur_width():
    conds = [condition_number(conv_matrix(psf_build("gaussian-iso", 7, s), 12, 12, "zero"))
             for s in (0.6, 1.0, 1.4)]
    assert conds[0] < conds[1] < conds[2]


def test_pinv_orthonormal_is_transpose():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((4, 4)))
    assert np.allclose(pinv_left(Q), Q.T)
    assert np.allclose(pinv_right(Q), Q.T)


def test_pinv_left_vandermonde():
    A = np.vander([-1.0, 0.0, 1.0, 2.0], 2, increasing=True)
    P = pinv_left(A)
    assert np.abs(P @ A - np.eye(2)).max() <= 1e-10
    # generic dense solve of the normal equations
    assert np.allclose(P, np.linalg.solve(A.T @ A, A.T))


def test_pinv_right_wide():
    A = 2.0 * np.array([[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, -1.0]]) / 2.0
    P = pinv_right(A)
    assert np.abs(A @ P - np.eye(2)).max() <= 1e-10
    assert np.allclose(P, A.T @ np.linalg.solve(A @ A.T, np.eye(2)))


def test_pinv_rank_deficient_raises():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(SingularityError):
        pinv_left(A)
    with pytest.raises(SingularityError):
        pinv_right(A.T)


def test_pinv_left_matches_brute_force_least_squares():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    x = pinv_left(A) @ y

    def f(c):
        r = A @ c - y
        return r @ r

    # grid refinement around the origin
    centre, width = np.zeros(2), 4.0
    for _ in range(30):
        g = np.linspace(-width, width, 21)
        best = min(((centre[0] + a, centre[1] + b) for a in g for b in g), key=lambda c: f(np.array(c)))
        centre, width = np.array(best), width / 4
    assert np.abs(x - centre).max() <= 1e-6
