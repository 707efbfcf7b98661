import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsd_kuramoto import cxmat
from bsd_kuramoto.errors import NotHermitian, RankDeficient


def taylor_exp(X, terms=60):
    # reference series, fine for the small norms used below
    out = np.eye(X.shape[0], dtype=complex)
    term = np.eye(X.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    return out


def test_herm_eig_hand_values():
    # [[2, i], [-i, 2]] has eigenvalues 1 and 3
    H = np.array([[2, 1j], [-1j, 2]])
    w, V = cxmat.herm_eig(H)
    np.testing.assert_allclose(w, [1.0, 3.0], atol=1e-14)
    np.testing.assert_allclose(V @ np.diag(w) @ V.conj().T, H, atol=1e-14)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        cxmat.herm_eig(np.array([[1, 1], [0, 1]]))


def test_mat_exp_rotation():
    t = 0.7
    X = np.array([[0, -t], [t, 0]], dtype=complex)
    R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    np.testing.assert_allclose(cxmat.mat_exp(X), R, atol=1e-14)


def test_mat_exp_matches_series(rng):
    X = 0.5 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    np.testing.assert_allclose(cxmat.mat_exp(X), taylor_exp(X), atol=1e-12)


def test_mat_exp_of_skew_hermitian_is_unitary(rng):
    U = cxmat.mat_exp(cxmat.random_skew_hermitian(5, rng))
    np.testing.assert_allclose(U.conj().T @ U, np.eye(5), atol=1e-13)


def test_polar_factor_matches_svd(rng):
    Z = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    U, _, Vh = np.linalg.svd(Z, full_matrices=False)
    np.testing.assert_allclose(cxmat.polar_unitary_factor(Z), U @ Vh, atol=1e-12)


def test_polar_factor_batched(rng):
    Z = rng.standard_normal((6, 3, 3)) + 1j * rng.standard_normal((6, 3, 3))
    P = cxmat.polar_unitary_factor(Z)
    for k in range(6):
        np.testing.assert_allclose(P[k], cxmat.polar_unitary_factor(Z[k]), atol=1e-13)


def test_polar_factor_rank_deficient():
    with pytest.raises(RankDeficient):
        cxmat.polar_unitary_factor(np.array([[1, 0], [0, 0]], dtype=complex))


def test_inv_sqrt_psd():
    H = np.diag([4.0, 9.0]).astype(complex)
    np.testing.assert_allclose(cxmat.inv_sqrt_psd(H), np.diag([0.5, 1 / 3]), atol=1e-14)


def test_positive_definite():
    assert cxmat.is_positive_definite(np.eye(3))
    assert not cxmat.is_positive_definite(np.diag([1.0, 0.0]))


def test_haar_unitary_is_unitary_and_seeded():
    a = cxmat.haar_unitary(4, np.random.default_rng(3))
    b = cxmat.haar_unitary(4, np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a.conj().T @ a, np.eye(4), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_polar_factor_is_isometry(n, seed):
    r = np.random.default_rng(seed)
    Z = r.standard_normal((n + 1, n)) + 1j * r.standard_normal((n + 1, n))
    P = cxmat.polar_unitary_factor(Z)
    np.testing.assert_allclose(P.conj().T @ P, np.eye(n), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_skew_hermitian_property(n, seed):
    A = cxmat.random_skew_hermitian(n, np.random.default_rng(seed))
    np.testing.assert_allclose(A, -A.conj().T, atol=1e-15)
