import numpy as np
import pytest

from conftest import orthonormal
from errors import RankDeficientError, ValidationError
from linalg import (OrthonormalBasis, as_matrix, jacobi_eigh, polar_project, qr_decompose,
                    sample_gaussian_matrix, spectral_norm)
from rng import make_rng


def test_qr_identity():
    Q, R = qr_decompose(np.eye(3))
    np.testing.assert_allclose(Q.columns, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(R, np.eye(3), atol=1e-15)


def test_qr_single_column():
    Q, R = qr_decompose(np.array([[3.0], [4.0]]))
    np.testing.assert_allclose(Q.columns[:, 0], [0.6, 0.8], atol=1e-15)
    np.testing.assert_allclose(R, [[5.0]], atol=1e-14)


def test_qr_reconstructs_gaussian(rng):
    M = rng.standard_normal((20, 4))
    Q, R = qr_decompose(M)
    np.testing.assert_allclose(Q.columns.T @ Q.columns, np.eye(4), atol=1e-12)
    assert np.linalg.norm(Q.columns @ R - M) <= 1e-9 * np.linalg.norm(M)
    assert np.all(np.diag(R) > 0)
    np.testing.assert_allclose(np.tril(R, -1), 0.0)


def test_qr_overwrite_keeps_result():
    M = make_rng(3).standard_normal((50, 5))
    expected, R_expected = qr_decompose(M)
    Q, R = qr_decompose(M.copy(), overwrite=True)
    np.testing.assert_allclose(Q.columns, expected.columns, atol=1e-13)
    np.testing.assert_allclose(R, R_expected, atol=1e-13)


def test_qr_rank_deficient_names_column():
    M = np.zeros((5, 3))
    M[:, 0] = 1.0
    M[:, 1] = 2.0
    M[:, 2] = [1, 0, 0, 0, 0]
    with pytest.raises(RankDeficientError) as excinfo:
        qr_decompose(M)
    assert excinfo.value.column == 1


def test_qr_rejects_wide_matrix():
    with pytest.raises(ValidationError):
        qr_decompose(np.ones((2, 3)))


def test_as_matrix_rejects_nan():
    with pytest.raises(ValidationError):
        as_matrix(np.array([[1.0, np.nan]]))


def test_orthonormal_basis_checks_columns():
    OrthonormalBasis(np.eye(4)[:, :2])
    with pytest.raises(ValidationError):
        OrthonormalBasis(np.ones((3, 2)))


def test_spectral_norm_diagonal():
    assert spectral_norm(np.diag([2.0, 1.0])) == pytest.approx(2.0, rel=1e-8)


def test_spectral_norm_rank_one(rng):
    u = rng.standard_normal(30)
    v = rng.standard_normal(7)
    assert spectral_norm(np.outer(u, v)) == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v), rel=1e-8)


def test_spectral_norm_zero():
    assert spectral_norm(np.zeros((4, 3))) == 0.0


def test_spectral_norm_matches_svd(rng):
    M = rng.standard_normal((40, 6))
    assert spectral_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-8)


def test_spectral_norm_large_both_dims_uses_matvecs():
    M = np.zeros((300, 300))
    M[0, 0] = 3.0
    M[1, 1] = 1.0
    assert spectral_norm(M) == pytest.approx(3.0, rel=1e-8)


@pytest.mark.parametrize("gap", [3e-3, 1e-3, 5e-4])
def test_spectral_norm_near_degenerate_top_pair(gap):
    M = np.zeros((10, 3))
    M[:3, :3] = np.diag([1.0, 1.0 - gap, 0.5])
    assert spectral_norm(M) == pytest.approx(1.0, rel=1e-8)
    assert spectral_norm(M.T) == pytest.approx(1.0, rel=1e-8)


def test_spectral_norm_near_degenerate_large_gram():
    values = np.concatenate([[1.0, 1.0 - 1e-3], np.linspace(0.5, 0.01, 58)])
    R = orthonormal(60, 60, seed=8)
    L = orthonormal(60, 60, seed=9)
    M = (L * values[None, :]) @ R.T
    assert spectral_norm(M) == pytest.approx(1.0, rel=1e-8)


def test_spectral_norm_near_degenerate_matvec_branch():
    p = 300
    values = np.concatenate([[2.0, 2.0 * (1.0 - 1e-3)], np.full(p - 2, 0.3)])
    Q = orthonormal(p, p, seed=10)
    M = (Q * values[None, :]) @ Q.T
    assert spectral_norm(M) == pytest.approx(2.0, rel=1e-8)


def test_spectral_norm_transpose_invariant(rng):
    for shape in [(40, 6), (70, 50), (300, 260)]:
        M = rng.standard_normal(shape)
        expected = np.linalg.svd(M, compute_uv=False)[0]
        assert spectral_norm(M) == pytest.approx(expected, rel=1e-8)
        assert spectral_norm(M.T) == pytest.approx(spectral_norm(M), rel=1e-8)


def test_sample_gaussian_matrix_deterministic():
    a = sample_gaussian_matrix(10, 3, make_rng(5))
    b = sample_gaussian_matrix(10, 3, make_rng(5))
    assert a.shape == (10, 3)
    np.testing.assert_array_equal(a, b)


def test_sample_gaussian_matrix_rejects_zero():
    with pytest.raises(ValidationError):
        sample_gaussian_matrix(0, 3, make_rng(0))


def test_sample_gaussian_matrix_matches_generator():
    np.testing.assert_array_equal(sample_gaussian_matrix(2, 2, make_rng(42)), make_rng(42).standard_normal((2, 2)))


def test_sample_gaussian_matrix_moments():
    g = sample_gaussian_matrix(10_000, 1, make_rng(3))[:, 0]
    assert abs(g.mean()) < 0.04
    assert g.var() == pytest.approx(1.0, rel=0.1)


def test_jacobi_eigh_descending(rng):
    A = rng.standard_normal((6, 6))
    S = A @ A.T
    values, vectors = jacobi_eigh(S)
    np.testing.assert_allclose(values, np.sort(np.linalg.eigvalsh(S))[::-1], rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(S @ vectors, vectors * values[None, :], atol=1e-9)


def test_polar_project_preserves_span(rng):
    M = rng.standard_normal((15, 3))
    P = polar_project(M).columns
    np.testing.assert_allclose(P.T @ P, np.eye(3), atol=1e-12)
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    np.testing.assert_allclose(P, U @ Vt, atol=1e-9)


def test_polar_project_of_orthonormal_is_identity():
    Q = orthonormal(12, 4, seed=2)
    np.testing.assert_allclose(polar_project(Q).columns, Q, atol=1e-12)


def test_polar_project_single_column():
    np.testing.assert_allclose(polar_project(np.array([0.0, 3.0, 4.0])).columns[:, 0], [0, 0.6, 0.8])


def test_polar_project_rank_deficient():
    with pytest.raises(RankDeficientError):
        polar_project(np.ones((5, 2)))


def test_polar_project_random_keeps_span(rng):
    M = rng.standard_normal((8, 3))
    P = polar_project(M)
    np.testing.assert_allclose(P.columns.T @ P.columns, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(M @ np.linalg.pinv(M), P.projector(), atol=1e-9)


def test_polar_project_of_qr_product_spans_q(rng):
    Q = orthonormal(12, 3, seed=6)
    R = np.triu(rng.standard_normal((3, 3)))
    R[np.diag_indices(3)] = np.abs(R[np.diag_indices(3)]) + 0.5
    P = polar_project(Q @ R)
    np.testing.assert_allclose(P.projector(), OrthonormalBasis(Q).projector(), atol=1e-9)
