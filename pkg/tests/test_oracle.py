import math

import numpy as np
import pytest

from conftest import dense_gamma
from gammadiag.algebra import CapacityError, GammaIndex
from gammadiag.models import build_random, table1_fixture
from gammadiag.oracle import (
    EigenConvergenceError,
    dense_to_gamma,
    diagonal_row_to_eigenvalues,
    eigen_hermitian,
    gamma_coefficients,
    gamma_to_dense,
    naive_gamma_coefficients,
    rdm,
    walsh_hadamard_in_place,
    xor_gather,
)
from gammadiag.sparse import SparseGammaOperator

WORKED_4X4 = np.array([[3, 0, 7, 0], [0, 3, 0, 1], [7, 0, 1, 0], [0, 1, 0, 1]], dtype=float)
WORKED_TERMS = [(GammaIndex(0, 0, 2), 2.0), (GammaIndex(0, 2, 2), 1.0), (GammaIndex(2, 0, 2), 4.0), (GammaIndex(2, 1, 2), 3.0)]


def random_hermitian(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return a + a.conj().T


def test_gamma_to_dense_examples():
    np.testing.assert_array_equal(gamma_to_dense(SparseGammaOperator(2, WORKED_TERMS)), WORKED_4X4)
    np.testing.assert_array_equal(gamma_to_dense(SparseGammaOperator(1, [("Z", 1.0)])), np.diag([1.0, -1.0]))
    m = gamma_to_dense(table1_fixture())
    assert m.shape == (256, 256)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)


def test_gamma_to_dense_matches_entrywise_definition():
    op = build_random(3, 10, seed=4)
    expect = sum(h * dense_gamma(g) for g, h in op.items())
    np.testing.assert_array_equal(gamma_to_dense(op), expect)


def test_gamma_to_dense_capacity():
    with pytest.raises(CapacityError):
        gamma_to_dense(SparseGammaOperator(13, [("Z" * 13, 1.0)]))


def test_dense_to_gamma_examples():
    op = dense_to_gamma(np.diag([1.0, -1.0]))
    assert [(g.p, g.q, h) for g, h in op.items()] == [(0, 1, 1.0)]
    op = dense_to_gamma(WORKED_4X4)
    assert [(g.p, g.q, h) for g, h in op.items()] == [(g.p, g.q, h) for g, h in WORKED_TERMS]


def test_fast_transform_matches_naive():
    rng = np.random.default_rng(0)
    for m in (1, 2, 3):
        dim = 1 << m
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        np.testing.assert_allclose(gamma_coefficients(a), naive_gamma_coefficients(a), atol=1e-12)


def test_hermitian_8x8_matches_naive():
    h = random_hermitian(8, np.random.default_rng(1))
    coeffs = gamma_coefficients(h)
    np.testing.assert_allclose(coeffs, naive_gamma_coefficients(h), atol=1e-12)
    assert np.max(np.abs(coeffs.imag)) < 1e-12


def test_in_place_gather_matches():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    np.testing.assert_array_equal(gamma_coefficients(a, in_place_gather=True), gamma_coefficients(a))


def test_xor_gather_is_a_permutation():
    dim = 16
    m = np.arange(dim * dim, dtype=np.complex128).reshape(dim, dim)
    z = xor_gather(m.copy())
    assert sorted(z.real.ravel().tolist()) == list(range(dim * dim))
    for p in range(dim):
        for i in range(dim):
            assert z[p, i] == m[p ^ i, i]
    np.testing.assert_array_equal(xor_gather(m.copy(), in_place=True), z)


def test_dense_to_gamma_rejects_non_hermitian():
    with pytest.raises(ValueError):
        dense_to_gamma(np.array([[0, 1], [0, 0]], dtype=float))
    with pytest.raises(ValueError):
        dense_to_gamma(np.eye(3))
    with pytest.raises(ValueError):
        dense_to_gamma(np.eye(4)[:2])


@pytest.mark.parametrize("m", [4, 5, 6])
def test_round_trip(m):
    for seed in range(5):
        op = build_random(m, 30, seed=seed)
        back = dense_to_gamma(gamma_to_dense(op))
        assert back.keys.tolist() == op.keys.tolist()
        np.testing.assert_allclose(back.coefficients, op.coefficients, atol=1e-12, rtol=0)


def test_walsh_hadamard_examples():
    v = np.array([1.0, 0.0])
    walsh_hadamard_in_place(v)
    assert v.tolist() == [1.0, 1.0]
    v = np.array([1.0, 1.0])
    walsh_hadamard_in_place(v)
    assert v.tolist() == [2.0, 0.0]
    x = np.random.default_rng(3).standard_normal(64)
    y = x.copy()
    walsh_hadamard_in_place(y)
    walsh_hadamard_in_place(y)
    np.testing.assert_allclose(y, 64 * x, rtol=1e-12)
    with pytest.raises(ValueError):
        walsh_hadamard_in_place(np.zeros(6))


def test_walsh_hadamard_complex_and_rows():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    expect = m @ np.array([[(-1) ** bin(i & j).count("1") for j in range(8)] for i in range(8)])
    walsh_hadamard_in_place(m)
    np.testing.assert_allclose(m, expect, atol=1e-12)


def test_hadamard_orthogonality():
    m = 4
    for s in range(1 << m):
        row = np.array([(-1.0) ** bin(s & k).count("1") for k in range(1 << m)])
        walsh_hadamard_in_place(row)
        expect = np.zeros(1 << m)
        expect[s] = 1 << m
        np.testing.assert_array_equal(row, expect)


def test_eigen_hermitian_examples():
    np.testing.assert_allclose(eigen_hermitian(np.diag([1.0, -1.0])), [-1, 1])
    np.testing.assert_allclose(eigen_hermitian(np.array([[0, 1], [1, 0]])), [-1, 1])
    r50, r2 = math.sqrt(50), math.sqrt(2)
    np.testing.assert_allclose(eigen_hermitian(WORKED_4X4), sorted([2 - r50, 2 + r50, 2 - r2, 2 + r2]), atol=1e-12)


@pytest.mark.parametrize("dim", [1, 3, 5, 16, 33])
def test_eigen_hermitian_matches_numpy(dim):
    h = random_hermitian(dim, np.random.default_rng(dim))
    np.testing.assert_allclose(eigen_hermitian(h), np.linalg.eigvalsh(h), atol=1e-9)


def test_eigen_hermitian_errors():
    with pytest.raises(ValueError):
        eigen_hermitian(np.array([[0, 1], [0, 0]], dtype=float))
    with pytest.raises(ValueError):
        eigen_hermitian(np.zeros((2, 3)))
    with pytest.raises(CapacityError):
        eigen_hermitian(np.eye(1025))
    with pytest.raises(EigenConvergenceError):
        eigen_hermitian(random_hermitian(16, np.random.default_rng(0)), max_sweeps=1)
    np.testing.assert_array_equal(eigen_hermitian(np.zeros((4, 4))), np.zeros(4))


def test_diagonal_row_to_eigenvalues_examples():
    d0, d1 = 0.7, -0.2
    rep = diagonal_row_to_eigenvalues(SparseGammaOperator(1, [("I", d0), ("Z", d1)]))
    assert rep.eigenvalues.tolist() == sorted([d0 - d1, d0 + d1])
    assert rep.residual_offdiag_sq == 0.0
    rep = diagonal_row_to_eigenvalues(SparseGammaOperator(4, [("IIII", 1.5)]))
    assert rep.eigenvalues.tolist() == [1.5] * 16
    rep = diagonal_row_to_eigenvalues(SparseGammaOperator(1, [("Z", 1.0), ("X", 0.5)]))
    assert rep.residual_offdiag_sq == 0.25


def test_diagonal_extraction_matches_dense_for_diagonal_ops():
    rng = np.random.default_rng(7)
    for m in (2, 5, 8):
        qs = rng.choice(1 << m, size=min(20, 1 << m), replace=False)
        op = SparseGammaOperator.from_arrays(m, np.zeros(qs.size, np.uint64), qs, rng.uniform(-1, 1, qs.size))
        np.testing.assert_allclose(
            diagonal_row_to_eigenvalues(op).eigenvalues, np.sort(gamma_to_dense(op).diagonal().real), atol=1e-12
        )


def test_rdm_examples():
    a = np.array([1.0, 2.0, 3.0])
    assert rdm(a, a) == 0.0
    assert rdm([1.0], [-1.0]) == pytest.approx(math.sqrt(2))
    b = np.array([1.1, 2.0, 2.5])
    assert rdm(7.5 * a, 7.5 * b) == pytest.approx(rdm(a, b), rel=1e-12)
    assert rdm(np.zeros(3), np.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        rdm([1.0], [1.0, 2.0])
