"""Problem builders and the element-list file format.

Element lists hold one term per line, ``coefficient p_bits q_bits``, with
``p``/``q`` as zero-padded binary strings of the operator width.  Blank lines
and ``#`` comments are ignored; repeated indices accumulate.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from gammadiag.algebra import GammaIndex, PauliParseError
from gammadiag.sparse import SparseGammaOperator

# Calibration operator: six random gamma terms on 8 sites.
TABLE1_TERMS = (
    (-0.500231, "00000111", "10000011"),
    (0.957786, "00111010", "00111100"),
    (-0.245173, "10000110", "11100010"),
    (0.345722, "10111101", "00110001"),
    (0.172746, "11000110", "01110011"),
    (-0.960913, "11001110", "10001111"),
)

MODEL_KINDS = ("tfim", "random", "table1", "file")


class ElementFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class ModelSpec:
    """Which operator to build; serialized into run manifests."""

    kind: str
    n_sites: Optional[int] = None
    width: Optional[int] = None
    term_count: Optional[int] = None
    seed: Optional[int] = None
    path: Optional[str] = None
    periodic_xx: bool = False

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.kind == "tfim" and (self.n_sites is None or self.n_sites < 2):
            raise ValueError("tfim needs n_sites >= 2")
        if self.kind == "random" and (self.width is None or self.term_count is None):
            raise ValueError("random model needs width and term_count")
        if self.kind == "file" and not self.path:
            raise ValueError("file model needs a path")

    def build(self) -> SparseGammaOperator:
        if self.kind == "tfim":
            return build_tfim(self.n_sites, periodic_xx=self.periodic_xx)
        if self.kind == "random":
            return build_random(self.width, self.term_count, self.seed or 0)
        if self.kind == "table1":
            return table1_fixture()
        return read_elements(self.path)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _site_string(n: int, letters: dict[int, str]) -> str:
    return "".join(letters.get(i, "I") for i in range(n))


def build_tfim(n: int, periodic_xx: bool = False) -> SparseGammaOperator:
    """Transverse-field Ising chain with its Jordan-Wigner boundary string.

    ``sum_i X_i X_{i+1}`` over the open chain ``i = 0 .. n-2``, field
    ``2 Z_i`` on every site, plus ``Y_0 Z_1 ... Z_{n-2} Y_{n-1}``.  Site 0 is
    the leftmost tensor factor.  ``periodic_xx`` adds ``X_{n-1} X_0``.
    """
    if n < 2:
        raise ValueError(f"tfim needs at least 2 sites, got {n}")
    terms = []
    for i in range(n - 1):
        terms.append((_site_string(n, {i: "X", i + 1: "X"}), 1.0))
    if periodic_xx:
        terms.append((_site_string(n, {n - 1: "X", 0: "X"}), 1.0))
    for i in range(n):
        terms.append((_site_string(n, {i: "Z"}), 2.0))
    string = {0: "Y", n - 1: "Y"}
    string.update({i: "Z" for i in range(1, n - 1)})
    terms.append((_site_string(n, string), 1.0))
    return SparseGammaOperator(n, terms)


def build_random(width: int, k: int, seed: int = 0) -> SparseGammaOperator:
    """``k`` distinct uniformly drawn gamma terms with coefficients in ``[-1, 1)``.

    Draws come from numpy's Philox4x64 counter-based generator seeded with
    ``seed``: index pairs ``(p, q)`` are drawn uniformly (bounded-integer
    rejection inside ``Generator.integers``) and duplicates are redrawn,
    then one coefficient per term in draw order.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    if not 1 <= k <= 4**width:
        raise ValueError(f"cannot draw {k} distinct terms from {4**width} basis matrices")
    rng = np.random.Generator(np.random.Philox(seed))
    limit = 1 << width
    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < k:
        p, q = (int(x) for x in rng.integers(0, limit, size=2, dtype=np.uint64))
        chosen.setdefault((p, q))
    terms = []
    for p, q in chosen:
        h = 0.0
        while h == 0.0:
            h = float(rng.uniform(-1.0, 1.0))
        terms.append((GammaIndex(p, q, width), h))
    return SparseGammaOperator(width, terms)


def table1_fixture() -> SparseGammaOperator:
    return SparseGammaOperator(
        8, [(GammaIndex.from_bits(pb, qb), h) for h, pb, qb in TABLE1_TERMS]
    )


def parse_elements(text: str) -> SparseGammaOperator:
    width = None
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ElementFormatError(f"expected 'coefficient p_bits q_bits', got {raw!r}", lineno)
        try:
            h = float(fields[0])
        except ValueError:
            raise ElementFormatError(f"bad coefficient {fields[0]!r}", lineno) from None
        try:
            g = GammaIndex.from_bits(fields[1], fields[2])
        except (PauliParseError, ValueError) as exc:
            raise ElementFormatError(str(exc), lineno) from None
        if width is None:
            width = g.width
        elif g.width != width:
            raise ElementFormatError(f"width {g.width} differs from earlier width {width}", lineno)
        terms.append((g, h))
    if width is None:
        raise ElementFormatError("no elements found")
    try:
        return SparseGammaOperator(width, terms)
    except ValueError as exc:
        raise ElementFormatError(str(exc)) from None


def format_elements(op: SparseGammaOperator) -> str:
    lines = []
    for g, h in op.items():
        pb, qb = g.bits()
        lines.append(f"{h!r} {pb} {qb}")
    return "\n".join(lines) + ("\n" if lines else "")


def read_elements(path) -> SparseGammaOperator:
    with open(path, encoding="utf-8") as fh:
        return parse_elements(fh.read())


def write_elements(op: SparseGammaOperator, path) -> None:
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        fh.write(format_elements(op))


def pauli_terms(op: SparseGammaOperator) -> list[tuple[str, float]]:
    """``(pauli_string, coefficient)`` pairs; convenient for printing."""
    return [(g.to_pauli(), h) for g, h in op.items()]


__all__ = [
    "ElementFormatError",
    "ModelSpec",
    "TABLE1_TERMS",
    "build_random",
    "build_tfim",
    "format_elements",
    "parse_elements",
    "pauli_terms",
    "read_elements",
    "table1_fixture",
    "write_elements",
]
