"""Dense brute-force counterpart of the sparse gamma machinery.

Used to check the sparse path: materialize operators, decompose dense
matrices back into gamma coefficients, and compute reference spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gammadiag import _kernels
from gammadiag.algebra import CapacityError, GammaIndex
from gammadiag.sparse import SparseGammaOperator

MAX_DENSE_WIDTH = 12
MAX_DIAGONAL_WIDTH = 24
MAX_EIGEN_DIM = 1024

_PHASE = np.array([1, 1j, -1, -1j], dtype=np.complex128)


class EigenConvergenceError(RuntimeError):
    """The Jacobi eigensolver exhausted its sweep budget."""


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    residual_offdiag_sq: float = 0.0


def _width_of(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def gamma_to_dense(op: SparseGammaOperator) -> np.ndarray:
    """Dense ``2^m x 2^m`` complex matrix ``sum h Gamma^{p,q}``."""
    m = op.width
    if m > MAX_DENSE_WIDTH:
        raise CapacityError(f"dense materialization capped at width {MAX_DENSE_WIDTH}, got {m}")
    dim = 1 << m
    out = np.zeros((dim, dim), dtype=np.complex128)
    rows = np.arange(dim, dtype=np.uint64)
    for g, h in op.items():
        pq = int(g.p & g.q).bit_count()
        exps = (2 * np.bitwise_count(rows & np.uint64(g.q)).astype(np.int64) - pq) & 3
        cols = rows ^ np.uint64(g.p)
        out[rows, cols] += h * _PHASE[exps]
    return out


def walsh_hadamard_in_place(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of ``v`` along its last axis, in place."""
    return _kernels.fwht(v)


def xor_gather(m: np.ndarray, in_place: bool = False) -> np.ndarray:
    """Rearrange ``M`` so that row ``p`` holds the ``p``-th XOR diagonal."""
    if in_place:
        return _kernels.xor_gather_inplace(m)
    return _kernels.xor_gather(m)


def gamma_coefficients(m: np.ndarray, in_place_gather: bool = False) -> np.ndarray:
    """Complex coefficient table ``X[p, q] = 2^-m Tr(Gamma^{p,q} M)``.

    Runs in ``O(N^2 log N)``: an XOR gather ``Z[p, i] = M[p ^ i, i]``, a
    Walsh-Hadamard transform of every row of ``Z``, then the per-entry phase
    ``i^{-p.q}``.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    _width_of(m.shape[0])
    dim = m.shape[0]
    z = np.array(m, dtype=np.complex128, order="C", copy=True)
    z = xor_gather(z, in_place=in_place_gather)
    z = np.ascontiguousarray(z)
    walsh_hadamard_in_place(z)
    idx = np.arange(dim, dtype=np.uint64)
    pq = np.bitwise_count(idx[:, None] & idx[None, :]).astype(np.int64)
    z *= _PHASE[(-pq) & 3]
    z /= dim
    return z


def dense_to_gamma(
    m: np.ndarray, drop_below: float = 1e-14, imag_tol: float = 1e-12, in_place_gather: bool = False
) -> SparseGammaOperator:
    """Decompose a Hermitian matrix into real gamma coefficients.

    Coefficients with magnitude below ``drop_below`` are discarded.  Raises
    ``ValueError`` when an imaginary part exceeds ``imag_tol`` (scaled by the
    largest entry of ``m`` when that exceeds 1), i.e. ``m`` is not Hermitian.
    """
    coeffs = gamma_coefficients(m, in_place_gather=in_place_gather)
    scale = max(1.0, float(np.max(np.abs(m)))) if np.size(m) else 1.0
    worst = float(np.max(np.abs(coeffs.imag)))
    if worst > imag_tol * scale:
        raise ValueError(f"matrix is not Hermitian: imaginary coefficient {worst:.3e}")
    real = coeffs.real
    p, q = np.nonzero(np.abs(real) >= drop_below)
    return SparseGammaOperator.from_arrays(_width_of(m.shape[0]), p, q, real[p, q])


def naive_gamma_coefficients(m: np.ndarray) -> np.ndarray:
    """Reference ``2^-m Tr(Gamma^dagger M)`` by explicit matrix products; tests only."""
    dim = m.shape[0]
    width = _width_of(dim)
    out = np.zeros((dim, dim), dtype=np.complex128)
    for p in range(dim):
        for q in range(dim):
            g = gamma_to_dense(SparseGammaOperator(width, [(GammaIndex(p, q, width), 1.0)]))
            out[p, q] = np.trace(g.conj().T @ m) / dim
    return out


def diagonal_row_to_eigenvalues(op: SparseGammaOperator) -> SpectrumReport:
    """Spectrum implied by the diagonal row, ignoring off-diagonal weight.

    The diagonal entries of the dense matrix are the Walsh-Hadamard
    transform of ``h[0, q]``; the off-diagonal squared norm left out is
    reported alongside.
    """
    m = op.width
    if m > MAX_DIAGONAL_WIDTH:
        raise CapacityError(f"diagonal extraction capped at width {MAX_DIAGONAL_WIDTH}, got {m}")
    q, h = op.diagonal()
    v = np.zeros(1 << m)
    v[q.astype(np.intp)] = h
    walsh_hadamard_in_place(v)
    v.sort()
    residual = max(0.0, op.total_sq_norm() - op.diagonal_sq_norm())
    return SpectrumReport(v, residual)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """``n - 1`` rounds of ``n / 2`` disjoint index pairs covering all pairs once."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        a = np.array(players[: n // 2])
        b = np.array(players[n // 2 :][::-1])
        lo, hi = np.minimum(a, b).astype(np.intp), np.maximum(a, b).astype(np.intp)
        rounds.append((lo, hi))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def eigen_hermitian(
    m: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100, herm_tol: float = 1e-10
) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi.

    Sweeps follow a round-robin ordering so each round applies ``n / 2``
    disjoint two-sided rotations at once.  Stops when the off-diagonal
    Frobenius norm is at most ``tol * ||M||_F``.

    Raises
    ------
    ValueError
        ``m`` deviates from Hermitian by more than ``herm_tol`` (relative).
    EigenConvergenceError
        ``max_sweeps`` sweeps did not reach ``tol``.
    """
    a = np.array(m, dtype=np.complex128, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_EIGEN_DIM:
        raise CapacityError(f"eigensolver capped at dimension {MAX_EIGEN_DIM}, got {n}")
    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return np.zeros(n)
    if float(np.max(np.abs(a - a.conj().T))) > herm_tol * max(1.0, fro):
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    if n == 1:
        return np.array([a[0, 0].real])
    pad = n % 2
    if pad:
        a = np.pad(a, ((0, 1), (0, 1)))
    size = a.shape[0]
    rounds = _round_robin(size)
    target = tol * fro

    mask = ~np.eye(size, dtype=bool)

    def offdiag_norm():
        # direct sum; |A|^2 - |diag|^2 cancels far above the target
        return float(np.linalg.norm(a[mask]))

    for _ in range(max_sweeps):
        if offdiag_norm() <= target:
            break
        for lo, hi in rounds:
            _kernels.jacobi_round(a, lo, hi)
    else:
        if offdiag_norm() > target:
            raise EigenConvergenceError(f"no convergence in {max_sweeps} sweeps")
    # the padded row/column never couples, so its diagonal slot is dropped
    return np.sort(np.diagonal(a).real[:n])


def rdm(a, b) -> float:
    """Relative distance ``|a - b| / sqrt(|a|^2 + |b|^2)`` of two eigenvalue vectors.

    Both vectors should be sorted ascending; with equal-length full spectra
    this pairing minimizes the distance.  Lies in ``[0, sqrt(2)]``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    denom = _scaled_norm(np.concatenate([a, b]))
    if denom == 0.0:
        return 0.0
    return min(_scaled_norm(a - b) / denom, math.sqrt(2.0))


def _scaled_norm(v: np.ndarray) -> float:
    # |v| without squaring tiny or huge entries into underflow/overflow
    scale = float(np.max(np.abs(v), initial=0.0))
    if scale == 0.0:
        return 0.0
    return scale * float(np.linalg.norm(v / scale))
