"""Property-based checks of the algebraic and numerical invariants."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gammadiag.algebra import (
    GammaIndex,
    dot,
    from_pauli_string,
    multiply,
    structure_constant,
    to_pauli_string,
    triple_sign,
)
from gammadiag.diagonalizer import (
    apply_rotation,
    optimal_angle,
    rotation_gain,
    xy_for_candidate,
)
from gammadiag.oracle import (
    dense_to_gamma,
    diagonal_row_to_eigenvalues,
    eigen_hermitian,
    gamma_to_dense,
    rdm,
    walsh_hadamard_in_place,
)
from gammadiag.sparse import SparseGammaOperator

words = st.integers(0, 2**16 - 1)
coeffs = st.floats(-4, 4, allow_nan=False).filter(lambda h: abs(h) > 1e-6)


@st.composite
def gamma(draw, m):
    return GammaIndex(draw(st.integers(0, (1 << m) - 1)), draw(st.integers(0, (1 << m) - 1)), m)


@st.composite
def operators(draw, min_width=1, max_width=6, max_terms=30):
    m = draw(st.integers(min_width, max_width))
    idx = draw(st.lists(st.tuples(st.integers(0, (1 << m) - 1), st.integers(0, (1 << m) - 1)),
                        min_size=1, max_size=max_terms, unique=True))
    hs = draw(st.lists(coeffs, min_size=len(idx), max_size=len(idx)))
    return SparseGammaOperator(m, [(GammaIndex(p, q, m), h) for (p, q), h in zip(idx, hs)])


@st.composite
def rotations(draw, max_width=6):
    op = draw(operators(max_width=max_width))
    m = op.width
    r = draw(st.integers(0, (1 << m) - 1))
    s = draw(st.integers(0, (1 << m) - 1))
    phi = draw(st.floats(-math.pi / 4, math.pi / 4))
    return op, r, s, phi


def unitary(m, r, s, phi):
    g = gamma_to_dense(SparseGammaOperator(m, [(GammaIndex(r, s, m), 1.0)])) if (r or s) else np.eye(1 << m)
    return math.cos(phi) * np.eye(1 << m) - 1j * math.sin(phi) * g


@given(words, words, words)
def test_xor_sum(s, p, q):
    assert dot(s, p ^ q) == dot(s, p) + dot(s, q) - 2 * dot(s, p & q)


@settings(max_examples=1000)
@given(st.integers(1, 8).flatmap(lambda m: st.tuples(gamma(m), gamma(m), gamma(m))))
def test_triple_product(triple):
    gen, a, b = triple
    composed = GammaIndex(a.p ^ b.p, a.q ^ b.q, a.width)
    lhs = structure_constant(composed, gen)
    rhs = structure_constant(a, gen) + structure_constant(b, gen) + triple_sign(gen, a, b)
    assert lhs == rhs % 4


@given(st.integers(1, 8).flatmap(lambda m: st.tuples(gamma(m), gamma(m), gamma(m))))
def test_multiplication_associative(triple):
    a, b, c = triple
    ab, k1 = multiply(a, b)
    left, k2 = multiply(ab, c)
    bc, k3 = multiply(b, c)
    right, k4 = multiply(a, bc)
    assert left == right
    assert (k1 + k2) % 4 == (k3 + k4) % 4


@given(st.text(alphabet="IXYZ", min_size=1, max_size=12))
def test_pauli_round_trip(text):
    assert to_pauli_string(from_pauli_string(text)) == text


@given(operators())
def test_epsilon_bounds_and_row_accounting(op):
    assert 0.0 <= op.epsilon() <= 1.0
    rows = sum(n for p, n in op.row_sq_norms() if p != 0)
    assert math.isclose(op.total_sq_norm(), op.diagonal_sq_norm() + rows, rel_tol=1e-12)


@given(operators(), st.floats(0, 2))
def test_prune_accounting(op, chi):
    before = op.total_sq_norm()
    report = op.prune(chi)
    assert math.isclose(op.total_sq_norm() + report.removed_sq_norm, before, rel_tol=1e-12, abs_tol=1e-15)
    assert report.removed_sq_norm <= report.removed_count * chi * chi * (1 + 1e-12)
    assert all(abs(h) > chi for _, h in op.items())


@given(operators(max_width=5))
def test_dense_hermitian_and_round_trip(op):
    m = gamma_to_dense(op)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
    back = dense_to_gamma(m, drop_below=1e-13)
    assert [g for g, _ in back.items()] == [g for g, _ in op.items()]
    np.testing.assert_allclose(back.coefficients, op.coefficients, atol=1e-12)


@settings(deadline=None)
@given(rotations())
def test_rotation_conserves_norm_and_commuting_sector(case):
    op, r, s, phi = case
    before = op.total_sq_norm()
    commuting = {g: h for g, h in op.items() if (dot(g.p, s) + dot(g.q, r)) % 2 == 0}
    apply_rotation(op, r, s, phi)
    assert math.isclose(op.total_sq_norm(), before, rel_tol=1e-12)
    for g, h in commuting.items():
        assert op.get(g) == h


@settings(deadline=None, max_examples=60)
@given(rotations(max_width=5))
def test_rotation_matches_dense_conjugation(case):
    op, r, s, phi = case
    u = unitary(op.width, r, s, phi)
    expect = dense_to_gamma(u @ gamma_to_dense(op) @ u.conj().T, drop_below=0.0)
    apply_rotation(op, r, s, phi)
    got = gamma_to_dense(op)
    np.testing.assert_allclose(got, gamma_to_dense(expect), atol=1e-10)


@settings(deadline=None)
@given(rotations())
def test_rotation_plane_norm_and_optimum(case):
    op, r, s, _ = case
    r = r or 1
    # a diagonal entry anticommuting with the generator keeps the plane nonempty
    op.add_term(GammaIndex(0, r & -r, op.width), 0.75)
    x, y = xy_for_candidate(op, r, s)
    radius = math.hypot(x, y)
    assume(radius > 1e-9)
    phi = float(np.random.default_rng(len(op)).uniform(-math.pi / 4, math.pi / 4))
    trial = op.copy()
    apply_rotation(trial, r, s, phi)
    xt, yt = xy_for_candidate(trial, r, s)
    assert math.isclose(math.hypot(xt, yt), radius, rel_tol=1e-10)

    diag_before = op.diagonal_sq_norm()
    best = optimal_angle(x, y)
    apply_rotation(op, r, s, best)
    x2, y2 = xy_for_candidate(op, r, s)
    assert abs(y2) <= 1e-10 * radius
    assert math.isclose(x2, radius, rel_tol=1e-10)
    assert op.diagonal_sq_norm() - diag_before >= rotation_gain(x, y) - 1e-12


# keep clear of the subnormal range so scaling by c stays exact enough
entries = st.floats(-1e6, 1e6).map(lambda x: 0.0 if abs(x) < 1e-200 else x)
vectors = st.integers(1, 40).flatmap(
    lambda n: st.tuples(*(st.lists(entries, min_size=n, max_size=n) for _ in range(2)))
)


@given(vectors, st.floats(1e-6, 1e6))
def test_rdm_properties(pair, c):
    a, b = (np.array(v) for v in pair)
    d = rdm(a, b)
    assert 0.0 <= d <= math.sqrt(2) + 1e-15
    assert (d == 0.0) == np.array_equal(a, b)
    assert math.isclose(rdm(c * a, c * b), d, rel_tol=1e-12, abs_tol=1e-15)


@given(st.integers(0, 8).flatmap(lambda m: st.lists(st.floats(-3, 3), min_size=1 << m, max_size=1 << m)))
def test_wht_involution(values):
    v = np.array(values)
    w = v.copy()
    walsh_hadamard_in_place(w)
    walsh_hadamard_in_place(w)
    np.testing.assert_allclose(w, v.size * v, atol=1e-9)


@settings(deadline=None, max_examples=40)
@given(st.integers(1, 6).flatmap(lambda m: st.tuples(st.just(m), st.lists(coeffs, min_size=1, max_size=1 << m))))
def test_diagonal_spectrum_matches_eigensolver(case):
    m, hs = case
    op = SparseGammaOperator(m, [(GammaIndex(0, q, m), h) for q, h in enumerate(hs)])
    got = diagonal_row_to_eigenvalues(op).eigenvalues
    np.testing.assert_allclose(got, eigen_hermitian(gamma_to_dense(op)), atol=1e-9)
