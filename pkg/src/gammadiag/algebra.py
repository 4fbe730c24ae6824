"""Bitwise algebra of gamma (Pauli-product) basis matrices.

A gamma matrix ``Gamma^{p,q}`` on ``m`` sites is a Kronecker product of
``I, X, Y, Z`` factors selected by the bits of two ``m``-bit integers.
Bit ``j`` of ``p`` picks the off-diagonal pair ``(X, Y)`` over ``(I, Z)``,
bit ``j`` of ``q`` picks the signed member of the pair::

    (p_j, q_j) = (0, 0) -> I    (1, 0) -> X
                 (0, 1) -> Z    (1, 1) -> Y

The leftmost tensor factor lives in the most significant bit, so site 0 of
a chain is bit ``m - 1``.

Phases are carried as exponents ``k`` of ``i**k`` (mod 4), never as floats,
which keeps every algebraic identity exact.
"""
from __future__ import annotations

from dataclasses import dataclass

MAX_WIDTH = 64

_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_PAULI = {v: k for k, v in _PAULI_BITS.items()}
_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)


class WidthError(ValueError):
    """Operands of different bit widths were combined."""


class CapacityError(ValueError):
    """A width or size exceeds what the representation supports."""


class PauliParseError(ValueError):
    """A Pauli string or binary field could not be parsed."""


@dataclass(frozen=True, slots=True)
class GammaIndex:
    """Index ``(p, q)`` of one basis matrix ``Gamma^{p,q}`` of width ``m``."""

    p: int
    q: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise CapacityError(f"width must be in [1, {MAX_WIDTH}], got {self.width}")
        limit = 1 << self.width
        if not (0 <= self.p < limit and 0 <= self.q < limit):
            raise ValueError(
                f"p={self.p}, q={self.q} do not fit in {self.width} bits"
            )

    @classmethod
    def identity(cls, width: int) -> GammaIndex:
        return cls(0, 0, width)

    @classmethod
    def from_pauli(cls, text: str) -> GammaIndex:
        return from_pauli_string(text)

    @classmethod
    def from_bits(cls, p_bits: str, q_bits: str) -> GammaIndex:
        """Build from two zero-padded binary strings of equal length."""
        if len(p_bits) != len(q_bits) or not p_bits:
            raise PauliParseError(
                f"binary fields must be nonempty and equal length: {p_bits!r}, {q_bits!r}"
            )
        try:
            p, q = int(p_bits, 2), int(q_bits, 2)
        except ValueError:
            raise PauliParseError(f"not binary: {p_bits!r} {q_bits!r}") from None
        if p_bits.lstrip("01") or q_bits.lstrip("01"):
            raise PauliParseError(f"not binary: {p_bits!r} {q_bits!r}")
        return cls(p, q, len(p_bits))

    @property
    def is_diagonal(self) -> bool:
        return self.p == 0

    def bits(self) -> tuple[str, str]:
        """Zero-padded binary strings of ``p`` and ``q``."""
        return format(self.p, f"0{self.width}b"), format(self.q, f"0{self.width}b")

    def to_pauli(self) -> str:
        return to_pauli_string(self)

    def __mul__(self, other: GammaIndex) -> tuple[GammaIndex, int]:
        return multiply(self, other)

    def __str__(self) -> str:
        return self.to_pauli()


def popcount(x: int) -> int:
    return x.bit_count()


def dot(a: int, b: int) -> int:
    """Binary metric ``a . b``: number of bit positions set in both words."""
    if a < 0 or b < 0:
        raise ValueError("bit words must be non-negative")
    return (a & b).bit_count()


def _check_width(*gs: GammaIndex) -> int:
    width = gs[0].width
    for g in gs[1:]:
        if g.width != width:
            raise WidthError(f"width mismatch: {width} vs {g.width}")
    return width


def structure_exponent(p: int, q: int, r: int, s: int) -> int:
    """Phase exponent ``k`` with ``Gamma^{pq} Gamma^{rs} = i**k Gamma^{p^r, q^s}``.

    Raw-integer form of :func:`structure_constant`; the first pair is the
    left factor.
    """
    k = dot(r, q) - dot(p, s)
    k += 2 * (dot(s ^ q, p & r) + dot(p ^ r, q & s))
    return k % 4


def structure_constant(left: GammaIndex, right: GammaIndex) -> int:
    """Phase exponent of the product ``Gamma^{left} Gamma^{right}``.

    Returns
    -------
    int
        ``k`` in ``0..3`` such that the product equals
        ``i**k * Gamma^{left.p ^ right.p, left.q ^ right.q}``.

    Examples
    --------
    >>> X, Z = GammaIndex(1, 0, 1), GammaIndex(0, 1, 1)
    >>> structure_constant(X, Z)   # X Z = -i Y
    3
    """
    _check_width(left, right)
    return structure_exponent(left.p, left.q, right.p, right.q)


def multiply(left: GammaIndex, right: GammaIndex) -> tuple[GammaIndex, int]:
    """Product of two basis matrices as ``(index, phase_exponent)``."""
    width = _check_width(left, right)
    k = structure_exponent(left.p, left.q, right.p, right.q)
    return GammaIndex(left.p ^ right.p, left.q ^ right.q, width), k


def commutes(a: GammaIndex, b: GammaIndex) -> bool:
    """True iff the two basis matrices commute (otherwise they anticommute)."""
    _check_width(a, b)
    return (dot(a.p, b.q) + dot(a.q, b.p)) % 2 == 0


def kron(a: GammaIndex, b: GammaIndex) -> GammaIndex:
    """Kronecker product ``Gamma^a (x) Gamma^b``; ``a`` takes the high bits."""
    width = a.width + b.width
    if width > MAX_WIDTH:
        raise CapacityError(f"combined width {width} exceeds {MAX_WIDTH}")
    return GammaIndex((a.p << b.width) | b.p, (a.q << b.width) | b.q, width)


def triple_sign(gen: GammaIndex, a: GammaIndex, b: GammaIndex) -> int:
    """Sign factor relating structure constants of a composed right factor.

    With ``gen = (r, s)``, ``a = (p, q)`` and ``b = (u, v)`` this is the
    exponent (0 for +1, 2 for -1) of ``g`` in::

        f[(p^u, q^v), (r, s)] = f[(p, q), (r, s)] * f[(u, v), (r, s)] * g

    where ``f[x, y]`` is the phase of ``Gamma^x Gamma^y``.
    """
    _check_width(gen, a, b)
    r, s = gen.p, gen.q
    p, q = a.p, a.q
    u, v = b.p, b.q
    parity = (
        popcount((r ^ s) & (p ^ q) & (u ^ v))
        + popcount(r & u & p)
        + popcount(s & v & q)
    )
    return 2 * (parity % 2)


def phase(k: int) -> complex:
    """Complex value of ``i**k``."""
    return _PHASES[k % 4]


def from_pauli_string(text: str) -> GammaIndex:
    """Parse a string over ``IXYZ``; the leftmost letter is the leftmost factor."""
    if not text:
        raise ValueError("empty Pauli string")
    if len(text) > MAX_WIDTH:
        raise CapacityError(f"Pauli string longer than {MAX_WIDTH} sites")
    p = q = 0
    for pos, ch in enumerate(text):
        try:
            pb, qb = _PAULI_BITS[ch]
        except KeyError:
            raise PauliParseError(f"invalid Pauli letter {ch!r} at position {pos}") from None
        p = (p << 1) | pb
        q = (q << 1) | qb
    return GammaIndex(p, q, len(text))


def to_pauli_string(g: GammaIndex) -> str:
    out = []
    for j in range(g.width - 1, -1, -1):
        out.append(_BITS_PAULI[((g.p >> j) & 1, (g.q >> j) & 1)])
    return "".join(out)


def dense_entry(g: GammaIndex, i: int, j: int) -> complex:
    """Entry ``(i, j)`` of the dense ``2^m x 2^m`` matrix of ``Gamma^g``."""
    dim = 1 << g.width
    if not (0 <= i < dim and 0 <= j < dim):
        raise IndexError(f"entry ({i}, {j}) outside a {dim}x{dim} matrix")
    if i ^ j ^ g.p:
        return 0j
    k = 2 * dot(g.q, i) - dot(g.p, g.q)
    return _PHASES[k % 4]
