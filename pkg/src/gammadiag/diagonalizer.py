"""Jacobi diagonalization of sparse gamma operators into the spin-z basis.

Each step conjugates the operator by ``U = cos(phi) I - i sin(phi) Gamma^{r,s}``
(``H -> U H U^dagger``).  Entries commuting with the generator are left
alone; every anticommuting entry ``a`` is mixed with its partner
``b = a ^ (r, s)``::

    a' = cos(2 phi) a + sigma sin(2 phi) b
    b' = cos(2 phi) b - sigma sin(2 phi) a

with ``sigma = i * f`` the real sign of the structure constant of
``Gamma^{r,s} Gamma^{a}``.  Restricted to the diagonal row, the squared-norm
difference ``X`` and cross term ``Y`` of the mixed pairs rotate by ``4 phi``,
so ``phi = atan2(Y, X) / 4`` moves the largest possible weight onto the
diagonal.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from gammadiag import _kernels
from gammadiag.algebra import dot
from gammadiag.sparse import EmptyOperatorError, SparseGammaOperator


_QUARTER = math.pi / 4


class Status(str, enum.Enum):
    CONVERGED = "converged"
    STALLED = "stalled"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class DiagonalizeConfig:
    """Thresholds and limits for :func:`diagonalize`.

    ``stop_epsilon`` is the residual at which the run stops, ``delete_chi``
    the magnitude at or below which coefficients are pruned after every
    rotation.  ``weighted`` scores candidate generators by coefficient
    mass; ``False`` counts index coincidences instead.  ``parity_toggle``
    selects the plain ``s . r`` parity rule in :func:`candidate_for_row`.
    ``bucket_retry_limit`` bounds the alternative generators tried on a row
    whose heuristic pick gains nothing (see :func:`bucket_candidates`).
    """

    stop_epsilon: float = 2.0**-7
    delete_chi: float = 2.0**-11
    max_rotations: int = 10**6
    gain_tolerance: float = 1e-14
    candidate_retry_limit: int = 8
    weighted: bool = True
    parity_toggle: bool = False
    bucket_retry_limit: int = 16

    def __post_init__(self):
        if not 0.0 < self.stop_epsilon < 1.0:
            raise ValueError(f"stop_epsilon must be in (0, 1), got {self.stop_epsilon}")
        if self.delete_chi < 0.0:
            raise ValueError(f"delete_chi must be >= 0, got {self.delete_chi}")
        if self.max_rotations < 1:
            raise ValueError("max_rotations must be >= 1")
        if self.gain_tolerance < 0.0:
            raise ValueError("gain_tolerance must be >= 0")
        if self.candidate_retry_limit < 0:
            raise ValueError("candidate_retry_limit must be >= 0")
        if self.bucket_retry_limit < 0:
            raise ValueError("bucket_retry_limit must be >= 0")


@dataclass(frozen=True)
class RotationStep:
    iteration: int
    r: int
    s: int
    phi: float
    epsilon_after: float
    elements_after: int
    pruned_sq_norm_cum: float
    gain: float = 0.0


@dataclass
class DiagonalizeOutcome:
    status: Status
    history: list[RotationStep] = field(default_factory=list)
    operator: Optional[SparseGammaOperator] = None
    initial_epsilon: float = 1.0

    @property
    def rotations(self) -> int:
        return len(self.history)

    @property
    def epsilon(self) -> float:
        return self.history[-1].epsilon_after if self.history else self.initial_epsilon


def _check_bits(op: SparseGammaOperator, *words: int) -> None:
    limit = 1 << op.width
    for w in words:
        if not 0 <= w < limit:
            raise ValueError(f"bit word {w} does not fit in {op.width} bits")


def xy_for_candidate(op: SparseGammaOperator, r: int, s: int) -> tuple[float, float]:
    """Diagonal-row rotation statistics of generator ``(r, s)``.

    Returns
    -------
    (X, Y) : tuple of float
        ``X`` is the squared norm of the anticommuting diagonal entries minus
        that of their partners in row ``r``; ``Y`` is twice their signed inner
        product.
    """
    if r == 0:
        raise ValueError("candidate row r must be nonzero")
    _check_bits(op, r, s)
    x, y = _kernels.xy(op._keys, op._vals, r, s)
    return float(x), float(y)


def optimal_angle(x: float, y: float) -> float:
    """Angle in ``[-pi/4, pi/4]`` maximizing ``cos(4 phi) X + sin(4 phi) Y``."""
    if x == 0.0 and y == 0.0:
        return 0.0
    return 0.25 * math.atan2(y, x)


def rotation_gain(x: float, y: float) -> float:
    """Diagonal squared-norm gain of the optimal rotation, ``(hypot(X, Y) - X) / 2``."""
    radius = math.hypot(x, y)
    if x > 0.0:
        # cancellation-free form of the same quantity
        return y * y / (2.0 * (radius + x))
    return 0.5 * (radius - x)


def apply_rotation(op: SparseGammaOperator, r: int, s: int, phi: float) -> None:
    """Conjugate ``op`` in place by ``cos(phi) I - i sin(phi) Gamma^{r,s}``."""
    if not math.isfinite(phi):
        raise ValueError(f"non-finite rotation angle {phi!r}")
    _check_bits(op, r, s)
    if (r == 0 and s == 0) or phi == 0.0 or not len(op):
        return
    if abs(phi) == _QUARTER:
        # exact swap; cos(pi/2) would leave 6e-17 residues behind
        c2, s2 = 0.0, math.copysign(1.0, phi)
    else:
        c2, s2 = math.cos(2 * phi), math.sin(2 * phi)
    keys, vals = _kernels.rotate(op._keys, op._vals, r, s, c2, s2)
    op._replace(keys, vals)


def ranked_rows(op: SparseGammaOperator) -> np.ndarray:
    """Off-diagonal rows ordered by squared norm, largest first, ties by smaller ``p``."""
    rows, norms = op.row_norm_arrays()
    if rows.size and rows[0] == 0:
        rows, norms = rows[1:], norms[1:]
    return rows[np.lexsort((rows, -norms))]


def candidate_for_row(
    op: SparseGammaOperator, r: int, weighted: bool = True, parity_toggle: bool = False
) -> int:
    """Pick the generator bits ``s`` to pair with row ``r``.

    When most diagonal entries anticommute with row ``r``, ``s`` is the most
    common ``q0 ^ q_r`` over anticommuting diagonal/row pairs.  Otherwise
    (or when no such pair exists) that winner, or 0, has the lowest set bit
    of ``r`` toggled if needed so that the heaviest entry of row ``r``
    anticommutes with the generator and lands on the diagonal.
    ``parity_toggle=True`` instead toggles until ``s . r`` is odd.
    """
    dq, dh = op.diagonal()
    rq, rh = op.row(r)
    anti = int(np.count_nonzero(np.bitwise_count(dq & np.uint64(r)) & 1))
    commuting = dq.size - anti
    s, _ = _kernels.bucket_best_s(dq, dh, rq, rh, r, weighted)
    if s >= 0 and anti >= commuting:
        return s
    s = max(s, 0)
    if parity_toggle:
        if dot(s, r) % 2 == 0:
            s ^= r & -r
        return s
    if rq.size:
        heaviest = int(rq[int(np.argmax(np.abs(rh)))])
        if dot(heaviest ^ s, r) % 2 == 0:
            s ^= r & -r
    return s


def select_candidate(
    op: SparseGammaOperator, weighted: bool = True, parity_toggle: bool = False
) -> Optional[tuple[int, int]]:
    """Heuristic best generator ``(r, s)``, or ``None`` for a diagonal operator."""
    rows = ranked_rows(op)
    if rows.size == 0:
        return None
    r = int(rows[0])
    return r, candidate_for_row(op, r, weighted, parity_toggle)


def bucket_candidates(op: SparseGammaOperator, r: int, limit: int, weighted: bool = True) -> list[int]:
    """Up to ``limit`` generator bits ``q0 ^ q_r`` over anticommuting pairs, best score first.

    Scores match :func:`candidate_for_row` (ties by smaller ``s``).  Used when
    the heuristic pick for row ``r`` has already been rotated to its optimum.
    """
    if limit <= 0:
        return []
    dq, dh = op.diagonal()
    rq, rh = op.row(r)
    odd = (np.bitwise_count(dq & np.uint64(r)) & 1).astype(bool)
    dq, dh = dq[odd], dh[odd]
    if not dq.size or not rq.size:
        return []
    buckets = (dq[:, None] ^ rq[None, :]).ravel()
    weights = np.abs(dh[:, None] * rh[None, :]).ravel() if weighted else np.ones(buckets.size)
    uniq, inv = np.unique(buckets, return_inverse=True)
    score = np.bincount(inv.ravel(), weights=weights, minlength=uniq.size)
    order = np.lexsort((uniq, -score))[:limit]
    return [int(x) for x in uniq[order]]


def _best_for_row(op: SparseGammaOperator, r: int, config: DiagonalizeConfig):
    s = candidate_for_row(op, r, config.weighted, config.parity_toggle)
    x, y = _kernels.xy(op._keys, op._vals, r, s)
    gain = rotation_gain(x, y)
    if gain > config.gain_tolerance:
        return r, s, x, y, gain
    best = None
    for alt in bucket_candidates(op, r, config.bucket_retry_limit, config.weighted):
        if alt == s:
            continue
        x, y = _kernels.xy(op._keys, op._vals, r, alt)
        gain = rotation_gain(x, y)
        if gain > config.gain_tolerance and (best is None or gain > best[4]):
            best = (r, alt, x, y, gain)
    return best


StepCallback = Callable[[RotationStep, SparseGammaOperator], None]


def diagonalize(
    op: SparseGammaOperator,
    config: Optional[DiagonalizeConfig] = None,
    on_step: Optional[StepCallback] = None,
) -> DiagonalizeOutcome:
    """Rotate ``op`` in place toward the spin-z basis.

    Every accepted step applies the optimal rotation for the first candidate
    (by row rank, up to ``candidate_retry_limit`` fallback rows, each with up
    to ``bucket_retry_limit`` alternative generators) whose diagonal gain
    exceeds ``gain_tolerance``, prunes with ``delete_chi`` and records
    the post-prune residual.  ``on_step`` is called after each step.
    """
    config = config or DiagonalizeConfig()
    if not len(op):
        raise EmptyOperatorError("cannot diagonalize the zero operator")
    eps = op.epsilon()
    outcome = DiagonalizeOutcome(Status.CONVERGED, [], op, initial_epsilon=eps)
    history = outcome.history
    pruned_cum = 0.0

    while True:
        if eps <= config.stop_epsilon:
            outcome.status = Status.CONVERGED
            break
        if len(history) >= config.max_rotations:
            outcome.status = Status.BUDGET_EXHAUSTED
            break
        rows = ranked_rows(op)
        chosen = None
        for r in rows[: 1 + config.candidate_retry_limit].tolist():
            chosen = _best_for_row(op, r, config)
            if chosen is not None:
                break
        if chosen is None:
            outcome.status = Status.STALLED
            break
        r, s, x, y, gain = chosen
        phi = optimal_angle(x, y)
        apply_rotation(op, r, s, phi)
        report = op.prune(config.delete_chi)
        pruned_cum += report.removed_sq_norm
        # everything pruned away leaves nothing off the diagonal
        eps = op.epsilon() if len(op) else 0.0
        step = RotationStep(
            iteration=len(history) + 1,
            r=r,
            s=s,
            phi=phi,
            epsilon_after=eps,
            elements_after=len(op),
            pruned_sq_norm_cum=pruned_cum,
            gain=gain,
        )
        history.append(step)
        if on_step is not None:
            on_step(step, op)
    return outcome
