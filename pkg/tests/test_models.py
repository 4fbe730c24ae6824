import numpy as np
import pytest

from gammadiag.algebra import GammaIndex
from gammadiag.models import (
    ElementFormatError,
    ModelSpec,
    build_random,
    build_tfim,
    format_elements,
    parse_elements,
    pauli_terms,
    read_elements,
    table1_fixture,
    write_elements,
)
from gammadiag.oracle import eigen_hermitian, gamma_to_dense


def test_tfim_two_sites():
    assert dict(pauli_terms(build_tfim(2))) == {"XX": 1.0, "ZI": 2.0, "IZ": 2.0, "YY": 1.0}


def test_tfim_three_sites():
    assert dict(pauli_terms(build_tfim(3))) == {
        "XXI": 1.0, "IXX": 1.0, "ZII": 2.0, "IZI": 2.0, "IIZ": 2.0, "YZY": 1.0,
    }


@pytest.mark.parametrize("n", range(2, 12))
def test_tfim_counts_and_norm(n):
    op = build_tfim(n)
    assert len(op) == 2 * n
    assert op.total_sq_norm() == (n - 1) + 4 * n + 1


@pytest.mark.parametrize("n", range(2, 8))
def test_tfim_traceless_real_spectrum(n):
    op = build_tfim(n)
    assert op.get(GammaIndex(0, 0, n)) == 0.0
    w = eigen_hermitian(gamma_to_dense(op))
    assert w.dtype.kind == "f"
    assert abs(w.sum()) < 1e-9 * (1 << n)


def test_tfim_periodic_bond():
    terms = dict(pauli_terms(build_tfim(4, periodic_xx=True)))
    assert terms["XIIX"] == 1.0
    assert len(terms) == 9


def test_tfim_rejects_single_site():
    with pytest.raises(ValueError):
        build_tfim(1)
    with pytest.raises(ValueError):
        ModelSpec("tfim", n_sites=1)


def test_random_deterministic_and_distinct():
    a = build_random(8, 6, seed=3)
    b = build_random(8, 6, seed=3)
    assert list(a.items()) == list(b.items())
    assert len(a) == 6
    assert all(g.width == 8 for g, _ in a.items())
    assert all(-1.0 <= h < 1.0 for _, h in a.items())
    c = build_random(8, 6, seed=4)
    assert list(a.items()) != list(c.items())


def test_random_fills_whole_basis():
    op = build_random(1, 4, seed=0)
    assert sorted((g.p, g.q) for g, _ in op.items()) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_random_rejects_too_many_terms():
    with pytest.raises(ValueError):
        build_random(1, 5)
    with pytest.raises(ValueError):
        build_random(2, 0)


def test_table1_values():
    op = table1_fixture()
    assert len(op) == 6
    assert op.width == 8
    assert op.get(GammaIndex.from_bits("00111010", "00111100")) == 0.957786
    assert op.get(GammaIndex.from_bits("00000111", "10000011")) == -0.500231
    assert op.get(GammaIndex.from_bits("11001110", "10001111")) == -0.960913
    m = gamma_to_dense(op)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)


def test_parse_single_line():
    op = parse_elements("0.5 01 10\n")
    assert op.width == 2
    assert [(g.p, g.q, h) for g, h in op.items()] == [(1, 2, 0.5)]


def test_parse_comments_and_duplicates():
    op = parse_elements("# header\n\n0.25 01 10\n0.5 01 10  # again\n1 00 00\n")
    assert len(op) == 2
    assert op.get(GammaIndex(1, 2, 2)) == 0.75


@pytest.mark.parametrize(
    "text, line",
    [
        ("0.5 01 10\n1.0 01\n", 2),
        ("0.5 01 10\nabc 01 10\n", 2),
        ("0.5 012 100\n", 1),
        ("0.5 01 10\n\n0.5 011 100\n", 3),
    ],
)
def test_parse_errors_report_line(text, line):
    with pytest.raises(ElementFormatError) as info:
        parse_elements(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_parse_empty():
    with pytest.raises(ElementFormatError):
        parse_elements("# nothing\n")


def test_file_round_trip(tmp_path):
    for op in (table1_fixture(), build_tfim(5), build_random(6, 40, seed=9)):
        path = tmp_path / "ops.txt"
        write_elements(op, path)
        back = read_elements(path)
        assert back.width == op.width
        assert list(back.items()) == list(op.items())
        assert format_elements(back) == path.read_text()


def test_model_spec_builds(tmp_path):
    path = tmp_path / "m.txt"
    write_elements(build_tfim(3), path)
    assert len(ModelSpec("file", path=str(path)).build()) == 6
    assert len(ModelSpec("tfim", n_sites=4).build()) == 8
    assert len(ModelSpec("table1").build()) == 6
    assert len(ModelSpec("random", width=5, term_count=7, seed=1).build()) == 7
    assert ModelSpec("random", width=5, term_count=7, seed=1).to_dict() == {
        "kind": "random", "width": 5, "term_count": 7, "seed": 1, "periodic_xx": False,
    }


@pytest.mark.parametrize("kwargs", [{"kind": "ising"}, {"kind": "random", "width": 3}, {"kind": "file"}])
def test_model_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        ModelSpec(**kwargs)
