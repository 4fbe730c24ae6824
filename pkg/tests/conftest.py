import numpy as np
import pytest

from gammadiag import _kernels
from gammadiag.algebra import GammaIndex, dense_entry


def dense_gamma(g: GammaIndex) -> np.ndarray:
    """Entry-by-entry dense matrix of one basis element (independent of the oracle module)."""
    dim = 1 << g.width
    return np.array([[dense_entry(g, i, j) for j in range(dim)] for i in range(dim)])


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_string(text: str) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for ch in text:
        out = np.kron(out, PAULI[ch])
    return out


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    with _kernels.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
