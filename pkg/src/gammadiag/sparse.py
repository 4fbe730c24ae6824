"""Sparse real-coefficient operators in the gamma basis.

``H = sum h[p, q] Gamma^{p,q}`` is stored as two parallel numpy arrays kept
sorted by the packed key ``p << 32 | q``, so each row ``p`` is a contiguous
block and the diagonal row ``p = 0`` comes first.  Real coefficients on the
Hermitian basis make every stored operator Hermitian.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from gammadiag import _kernels
from gammadiag.algebra import CapacityError, GammaIndex, WidthError, from_pauli_string

MAX_OPERATOR_WIDTH = _kernels.SHIFT
_SHIFT = np.uint64(_kernels.SHIFT)
_QMASK = np.uint64((1 << _kernels.SHIFT) - 1)


class EmptyOperatorError(ValueError):
    """A residual or normalization was requested of a zero operator."""


@dataclass(frozen=True)
class PruneReport:
    removed_count: int
    removed_sq_norm: float


def _pack(p: int, q: int) -> int:
    return (p << _kernels.SHIFT) | q


def _coerce_coeff(coeff) -> float:
    if isinstance(coeff, (complex, np.complexfloating)) and not isinstance(coeff, numbers.Real):
        raise TypeError(f"complex coefficient {coeff!r} rejected; coefficients are real")
    value = float(coeff)
    if not math.isfinite(value):
        raise ValueError(f"non-finite coefficient {coeff!r}")
    return value


class SparseGammaOperator:
    """Real linear combination of gamma basis matrices on ``width`` sites.

    Parameters
    ----------
    width : int
        Number of sites ``m`` (``1 <= m <= 32``).
    terms : iterable or mapping, optional
        ``(index, coefficient)`` pairs, where an index is a
        :class:`~gammadiag.algebra.GammaIndex` or a Pauli string such as
        ``"XZI"``.  Repeated indices accumulate.

    Examples
    --------
    >>> op = SparseGammaOperator(1, [("X", 1.0), ("Z", 2.0)])
    >>> op.total_sq_norm()
    5.0
    """

    __slots__ = ("_width", "_keys", "_vals")

    def __init__(self, width: int, terms=None):
        if not 1 <= width <= MAX_OPERATOR_WIDTH:
            raise CapacityError(
                f"operator width must be in [1, {MAX_OPERATOR_WIDTH}], got {width}"
            )
        self._width = int(width)
        acc: dict[int, float] = {}
        if terms is not None:
            items = terms.items() if hasattr(terms, "items") else terms
            for g, coeff in items:
                g = self._index(g)
                key = _pack(g.p, g.q)
                acc[key] = acc.get(key, 0.0) + _coerce_coeff(coeff)
        keys = sorted(k for k, v in acc.items() if v != 0.0)
        self._keys = np.array(keys, dtype=np.uint64)
        self._vals = np.array([acc[k] for k in keys], dtype=np.float64)

    @classmethod
    def _from_arrays(cls, width: int, keys: np.ndarray, vals: np.ndarray) -> SparseGammaOperator:
        # caller guarantees: sorted unique keys, finite nonzero values
        op = cls.__new__(cls)
        op._width = width
        op._keys = keys
        op._vals = vals
        return op

    @classmethod
    def from_arrays(cls, width: int, p, q, h) -> SparseGammaOperator:
        """Build from parallel index/coefficient arrays, accumulating duplicates."""
        p = np.asarray(p, dtype=np.uint64)
        q = np.asarray(q, dtype=np.uint64)
        h = np.asarray(h)
        if np.iscomplexobj(h):
            raise TypeError("complex coefficients rejected; coefficients are real")
        h = h.astype(np.float64)
        if not np.all(np.isfinite(h)):
            raise ValueError("non-finite coefficient")
        limit = np.uint64(1 << width)
        if p.size and (p.max() >= limit or q.max() >= limit):
            raise ValueError(f"indices do not fit in {width} bits")
        keys = (p << _SHIFT) | q
        uniq, inv = np.unique(keys, return_inverse=True)
        vals = np.bincount(inv.ravel(), weights=h, minlength=uniq.size)
        keep = vals != 0.0
        op = cls(width)
        op._keys = uniq[keep]
        op._vals = vals[keep]
        return op

    def _index(self, g) -> GammaIndex:
        if isinstance(g, str):
            g = from_pauli_string(g)
        if not isinstance(g, GammaIndex):
            raise TypeError(f"expected GammaIndex or Pauli string, got {type(g).__name__}")
        if g.width != self._width:
            raise WidthError(f"index width {g.width} does not match operator width {self._width}")
        return g

    def _locate(self, key: int) -> tuple[int, bool]:
        pos = int(np.searchsorted(self._keys, np.uint64(key)))
        return pos, pos < self._keys.size and int(self._keys[pos]) == key

    # -- container protocol -------------------------------------------------

    @property
    def width(self) -> int:
        return self._width

    @property
    def keys(self) -> np.ndarray:
        """Packed sorted keys ``p << 32 | q`` (read-only view)."""
        v = self._keys.view()
        v.flags.writeable = False
        return v

    @property
    def coefficients(self) -> np.ndarray:
        v = self._vals.view()
        v.flags.writeable = False
        return v

    @property
    def p(self) -> np.ndarray:
        return self._keys >> _SHIFT

    @property
    def q(self) -> np.ndarray:
        return self._keys & _QMASK

    def __len__(self) -> int:
        return int(self._keys.size)

    def __bool__(self) -> bool:
        return self._keys.size > 0

    def __iter__(self):
        for g, _ in self.items():
            yield g

    def items(self):
        """Yield ``(GammaIndex, coefficient)`` in ascending ``(p, q)`` order."""
        w = self._width
        for key, h in zip(self._keys.tolist(), self._vals.tolist()):
            yield GammaIndex(key >> _kernels.SHIFT, key & ((1 << _kernels.SHIFT) - 1), w), h

    def __contains__(self, g) -> bool:
        g = self._index(g)
        return self._locate(_pack(g.p, g.q))[1]

    def __getitem__(self, g) -> float:
        g = self._index(g)
        pos, hit = self._locate(_pack(g.p, g.q))
        if not hit:
            raise KeyError(g)
        return float(self._vals[pos])

    def get(self, g, default: float = 0.0) -> float:
        try:
            return self[g]
        except KeyError:
            return default

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseGammaOperator):
            return NotImplemented
        return (
            self._width == other._width
            and np.array_equal(self._keys, other._keys)
            and np.array_equal(self._vals, other._vals)
        )

    def __repr__(self) -> str:
        shown = ", ".join(f"{g.to_pauli()}: {h:.6g}" for g, h in list(self.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"SparseGammaOperator(width={self._width}, {{{shown}{more}}})"

    def copy(self) -> SparseGammaOperator:
        return self._from_arrays(self._width, self._keys.copy(), self._vals.copy())

    # -- mutation -----------------------------------------------------------

    def add_term(self, g, coeff) -> None:
        """Accumulate ``coeff`` onto ``g``; an exact-zero result is evicted."""
        g = self._index(g)
        value = _coerce_coeff(coeff)
        key = _pack(g.p, g.q)
        pos, hit = self._locate(key)
        if hit:
            new = float(self._vals[pos]) + value
            if new == 0.0:
                self._keys = np.delete(self._keys, pos)
                self._vals = np.delete(self._vals, pos)
            else:
                self._vals[pos] = new
        elif value != 0.0:
            self._keys = np.insert(self._keys, pos, np.uint64(key))
            self._vals = np.insert(self._vals, pos, value)

    def prune(self, chi: float) -> PruneReport:
        """Delete every entry with ``|h| <= chi`` in place."""
        if chi < 0:
            raise ValueError("chi must be non-negative")
        drop = np.abs(self._vals) <= chi
        count = int(np.count_nonzero(drop))
        if not count:
            return PruneReport(0, 0.0)
        removed = float(np.sum(self._vals[drop] ** 2))
        self._keys = self._keys[~drop]
        self._vals = self._vals[~drop]
        return PruneReport(count, removed)

    def _replace(self, keys: np.ndarray, vals: np.ndarray) -> None:
        self._keys = keys
        self._vals = vals

    # -- norms --------------------------------------------------------------

    def _diagonal_end(self) -> int:
        return int(np.searchsorted(self._keys, np.uint64(1 << _kernels.SHIFT)))

    def total_sq_norm(self) -> float:
        return float(np.dot(self._vals, self._vals))

    def diagonal_sq_norm(self) -> float:
        d = self._vals[: self._diagonal_end()]
        return float(np.dot(d, d))

    def epsilon(self) -> float:
        """Fraction of squared norm outside the diagonal row, in ``[0, 1]``."""
        total = self.total_sq_norm()
        if total == 0.0:
            raise EmptyOperatorError("residual is undefined for the zero operator")
        return min(1.0, max(0.0, 1.0 - self.diagonal_sq_norm() / total))

    def row_sq_norms(self) -> list[tuple[int, float]]:
        rows, norms = _kernels.row_sq_norms(self._keys, self._vals)
        return list(zip(rows.tolist(), norms.tolist()))

    def row_norm_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _kernels.row_sq_norms(self._keys, self._vals)

    def diagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """``(q, h)`` arrays of the diagonal row ``p = 0``."""
        end = self._diagonal_end()
        return self._keys[:end] & _QMASK, self._vals[:end]

    def row(self, p: int) -> tuple[np.ndarray, np.ndarray]:
        lo = int(np.searchsorted(self._keys, np.uint64(p << _kernels.SHIFT)))
        hi = int(np.searchsorted(self._keys, np.uint64((p + 1) << _kernels.SHIFT)))
        return self._keys[lo:hi] & _QMASK, self._vals[lo:hi]

    def is_diagonal(self) -> bool:
        return self._diagonal_end() == self._keys.size

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready ``{width, entries: [{p, q, h}]}`` with binary-string indices."""
        entries = []
        for g, h in self.items():
            pb, qb = g.bits()
            entries.append({"p": pb, "q": qb, "h": h})
        return {"width": self._width, "entries": entries}

    @classmethod
    def from_dict(cls, data: dict) -> SparseGammaOperator:
        width = int(data["width"])
        op = cls(width)
        terms = []
        for e in data["entries"]:
            g = GammaIndex.from_bits(e["p"], e["q"])
            terms.append((g, e["h"]))
        return cls(width, terms) if terms else op
