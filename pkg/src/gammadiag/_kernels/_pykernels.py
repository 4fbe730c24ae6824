"""Vectorized numpy kernels; the reference backend.

Operators arrive as two parallel arrays: ``keys`` (uint64, strictly
ascending, ``p << 32 | q``) and ``vals`` (float64, nonzero).  Every function
here has a twin of the same signature in ``_ckernels.pyx``.
"""
import numpy as np

SHIFT = 32
QMASK = np.uint64((1 << SHIFT) - 1)
_S = np.uint64(SHIFT)

# densest outer product materialized at once by bucket_best_s
_CHUNK = 1 << 22


def _parity(x):
    return np.bitwise_count(x) & np.uint8(1)


def rotation_signs(p, q, r, s):
    """``i * f`` for left factor ``(r, s)`` on anticommuting right factors.

    For anticommuting pairs the phase exponent is odd; 3 maps to +1 and
    1 maps to -1.
    """
    r = np.uint64(r)
    s = np.uint64(s)
    k = np.bitwise_count(p & s).astype(np.int64) - np.bitwise_count(r & q)
    k += 2 * (np.bitwise_count((q ^ s) & (r & p)).astype(np.int64)
              + np.bitwise_count((r ^ p) & (s & q)))
    return np.where((k & 3) == 3, 1.0, -1.0)


def rotate(keys, vals, r, s, c2, s2):
    """Conjugate by ``cos(phi) I - i sin(phi) Gamma^{r,s}``.

    ``c2``/``s2`` are ``cos(2 phi)``/``sin(2 phi)``.  Returns fresh sorted
    ``(keys, vals)`` with exact zeros evicted.
    """
    ru, su = np.uint64(r), np.uint64(s)
    gen = np.uint64((r << SHIFT) | s)
    p = keys >> _S
    q = keys & QMASK
    anti = (_parity(p & su) ^ _parity(q & ru)).astype(bool)
    if not anti.any():
        return keys.copy(), vals.copy()

    ak = keys[anti]
    ah = vals[anti]
    partner = ak ^ gen
    idx = np.searchsorted(keys, partner)
    idx[idx == keys.size] = 0
    found = keys[idx] == partner
    is_rep = ak < partner
    orphan = ~is_rep & ~found

    rep = np.concatenate((ak[is_rep], partner[orphan]))
    a = np.concatenate((ah[is_rep], np.zeros(np.count_nonzero(orphan))))
    b = np.concatenate(
        (np.where(found[is_rep], vals[idx[is_rep]], 0.0), ah[orphan])
    )
    sig = rotation_signs(rep >> _S, rep & QMASK, r, s) * s2
    new_a = c2 * a + sig * b
    new_b = c2 * b - sig * a

    out_k = np.concatenate((keys[~anti], rep, rep ^ gen))
    out_v = np.concatenate((vals[~anti], new_a, new_b))
    keep = out_v != 0.0
    out_k = out_k[keep]
    out_v = out_v[keep]
    order = np.argsort(out_k, kind="stable")
    return out_k[order], out_v[order]


def _block(keys, p):
    lo = np.searchsorted(keys, np.uint64(p << SHIFT))
    hi = np.searchsorted(keys, np.uint64((p + 1) << SHIFT))
    return lo, hi


def xy(keys, vals, r, s):
    """Rotation-plane statistics ``(X, Y)`` of candidate ``(r, s)`` at row 0."""
    ru, su = np.uint64(r), np.uint64(s)
    n0 = np.searchsorted(keys, np.uint64(1 << SHIFT))
    q0 = keys[:n0]
    h0 = vals[:n0]
    anti = _parity(q0 & ru).astype(bool)
    q0 = q0[anti]
    h0 = h0[anti]

    lo, hi = _block(keys, r)
    qr = keys[lo:hi] & QMASK
    hr = vals[lo:hi]
    partner_anti = _parity((qr ^ su) & ru).astype(bool)
    x = np.sum(h0 * h0) - np.sum(hr[partner_anti] ** 2)

    if q0.size == 0 or hi == lo:
        return float(x), 0.0
    want = (q0 ^ su) | np.uint64(r << SHIFT)
    idx = np.searchsorted(keys, want)
    idx[idx == keys.size] = 0
    found = keys[idx] == want
    if not found.any():
        return float(x), 0.0
    sig = rotation_signs(np.zeros(np.count_nonzero(found), np.uint64), q0[found], r, s)
    y = 2.0 * np.sum(sig * vals[idx[found]] * h0[found])
    return float(x), float(y)


def row_sq_norms(keys, vals):
    """Distinct rows ``p`` (ascending) and their squared norms."""
    if keys.size == 0:
        return np.zeros(0, np.uint64), np.zeros(0)
    p = keys >> _S
    starts = np.flatnonzero(np.concatenate(([True], p[1:] != p[:-1])))
    return p[starts], np.add.reduceat(vals * vals, starts)


def bucket_best_s(diag_q, diag_h, row_q, row_h, r, weighted):
    """Most common ``q0 ^ q_r`` over anticommuting diagonal/row pairs.

    Returns ``(s, score)``; ``s`` is -1 when no pair exists.  Ties go to the
    smallest ``s``.
    """
    ru = np.uint64(r)
    anti = _parity(diag_q & ru).astype(bool)
    dq = diag_q[anti]
    dh = np.abs(diag_h[anti])
    if dq.size == 0 or row_q.size == 0:
        return -1, 0.0
    rh = np.abs(row_h)
    rows_per_chunk = max(1, _CHUNK // row_q.size)
    uniq_parts, sum_parts = [], []
    for start in range(0, dq.size, rows_per_chunk):
        stop = start + rows_per_chunk
        buckets = (dq[start:stop, None] ^ row_q[None, :]).ravel()
        if weighted:
            w = (dh[start:stop, None] * rh[None, :]).ravel()
        else:
            w = None
        u, inv = np.unique(buckets, return_inverse=True)
        uniq_parts.append(u)
        sum_parts.append(np.bincount(inv, weights=w, minlength=u.size).astype(np.float64))
    if len(uniq_parts) == 1:
        u, sums = uniq_parts[0], sum_parts[0]
    else:
        u, inv = np.unique(np.concatenate(uniq_parts), return_inverse=True)
        sums = np.bincount(inv, weights=np.concatenate(sum_parts), minlength=u.size)
    best = int(np.argmax(sums))
    return int(u[best]), float(sums[best])


def fwht(v):
    """In-place unnormalized Walsh-Hadamard transform along the last axis."""
    n = v.shape[-1]
    if n & (n - 1) or n == 0:
        raise ValueError(f"length {n} is not a power of two")
    if not v.flags.c_contiguous:
        raise ValueError("fwht needs a C-contiguous array")
    lead = v.shape[:-1]
    h = 1
    while h < n:
        blk = v.reshape(lead + (n // (2 * h), 2, h))
        lo = blk[..., 0, :].copy()
        hi = blk[..., 1, :]
        blk[..., 0, :] += hi
        np.subtract(lo, hi, out=hi)
        h *= 2
    return v


def xor_gather(m):
    """Out-of-place ``Z[p, i] = M[p ^ i, i]``."""
    n = m.shape[0]
    cols = np.arange(n)
    rows = cols[:, None] ^ cols[None, :]
    return m[rows, cols[None, :]]


def xor_gather_inplace(m):
    """In-place ``M[p, i] <- M[p ^ i, i]``.

    Column ``i`` is permuted by the involution ``p -> p ^ i``; swapping
    each pair once from its smaller member avoids double swaps.
    """
    n = m.shape[0]
    rows = np.arange(n)
    for i in range(1, n):
        lo = rows[rows < (rows ^ i)]
        hi = lo ^ i
        tmp = m[lo, i].copy()
        m[lo, i] = m[hi, i]
        m[hi, i] = tmp
    return m


def jacobi_round(a, lo, hi):
    """One round of disjoint two-sided complex Jacobi rotations on ``a``, in place.

    Pair ``(lo[k], hi[k])`` is rotated so that ``a[lo, hi]`` vanishes; all
    rotation parameters come from the matrix before the round.
    """
    apq = a[lo, hi]
    mag = np.abs(apq)
    active = mag > 0.0
    if not active.any():
        return
    lo, hi, apq, mag = lo[active], hi[active], apq[active], mag[active]
    app = a[lo, lo].real
    aqq = a[hi, hi].real
    phase = apq / mag
    tau = (aqq - app) / (2.0 * mag)
    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # columns: A <- A V with V = diag(1, conj(phase)) R
    col_lo = a[:, lo]
    col_hi = a[:, hi]
    a[:, lo] = c * col_lo - s * np.conj(phase) * col_hi
    a[:, hi] = s * col_lo + c * np.conj(phase) * col_hi
    # rows: A <- V^dagger A
    row_lo = a[lo, :]
    row_hi = a[hi, :]
    a[lo, :] = c[:, None] * row_lo - (s * phase)[:, None] * row_hi
    a[hi, :] = s[:, None] * row_lo + (c * phase)[:, None] * row_hi
    a[hi, lo] = 0.0
    a[lo, hi] = 0.0
