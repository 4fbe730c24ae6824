# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled twins of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.pair cimport pair
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef int SHIFT = 32
cdef uint64_t QMASK = (<uint64_t>1 << 32) - 1


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int popc(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef inline double rot_sign(uint64_t p, uint64_t q, uint64_t r, uint64_t s) nogil:
    cdef int64_t k = <int64_t>popc(p & s) - <int64_t>popc(r & q)
    k += 2 * (<int64_t>popc((q ^ s) & (r & p)) + <int64_t>popc((r ^ p) & (s & q)))
    return 1.0 if (k & 3) == 3 else -1.0


cdef inline Py_ssize_t lower_bound(const uint64_t* keys, Py_ssize_t n, uint64_t key) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t find(const uint64_t* keys, Py_ssize_t n, uint64_t key) noexcept nogil:
    cdef Py_ssize_t lo = lower_bound(keys, n, key)
    if lo < n and keys[lo] == key:
        return lo
    return -1


def rotation_signs(p, q, r, s):
    cdef const uint64_t[::1] pv = np.ascontiguousarray(p, dtype=np.uint64)
    cdef const uint64_t[::1] qv = np.ascontiguousarray(q, dtype=np.uint64)
    cdef Py_ssize_t i, n = pv.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef uint64_t ru = r, su = s
    for i in range(n):
        ov[i] = rot_sign(pv[i], qv[i], ru, su)
    return out


def rotate(keys, vals, r, s, double c2, double s2):
    cdef const uint64_t[::1] kv = keys
    cdef const double[::1] hv = vals
    cdef uint64_t ru = r, su = s
    cdef uint64_t gen = (ru << SHIFT) | su
    cdef Py_ssize_t n = kv.shape[0], i, j, nnew = 0
    cdef uint64_t k, pk, p, q
    cdef double a, b, sig

    # existing keys stay sorted; only partners missing from the input are new
    upd = np.empty(n)
    new_k = np.empty(n, np.uint64)
    new_v = np.empty(n)
    cdef double[::1] uv = upd, nv = new_v
    cdef uint64_t[::1] nk = new_k

    with nogil:
        for i in range(n):
            k = kv[i]
            p = k >> SHIFT
            q = k & QMASK
            if ((popc(p & su) + popc(q & ru)) & 1) == 0:
                uv[i] = hv[i]
                continue
            pk = k ^ gen
            j = find(&kv[0], n, pk)
            if k < pk:
                a = hv[i]
                b = hv[j] if j >= 0 else 0.0
                sig = rot_sign(p, q, ru, su) * s2
                uv[i] = c2 * a + sig * b
                if j < 0:
                    nk[nnew] = pk
                    nv[nnew] = c2 * b - sig * a
                    nnew += 1
            else:
                a = hv[j] if j >= 0 else 0.0
                b = hv[i]
                sig = rot_sign(pk >> SHIFT, pk & QMASK, ru, su) * s2
                uv[i] = c2 * b - sig * a
                if j < 0:
                    nk[nnew] = pk
                    nv[nnew] = c2 * a + sig * b
                    nnew += 1

    new_k = new_k[:nnew]
    new_v = new_v[:nnew]
    order = np.argsort(new_k)
    new_k = new_k[order]
    new_v = new_v[order]
    nk = new_k
    nv = new_v

    out_k = np.empty(n + nnew, np.uint64)
    out_v = np.empty(n + nnew)
    cdef uint64_t[::1] ok = out_k
    cdef double[::1] ov = out_v
    cdef Py_ssize_t ia = 0, ib = 0, m = 0
    with nogil:
        # merge two sorted runs, dropping exact zeros
        while ia < n or ib < nnew:
            if ib >= nnew or (ia < n and kv[ia] < nk[ib]):
                if uv[ia] != 0.0:
                    ok[m] = kv[ia]
                    ov[m] = uv[ia]
                    m += 1
                ia += 1
            else:
                if nv[ib] != 0.0:
                    ok[m] = nk[ib]
                    ov[m] = nv[ib]
                    m += 1
                ib += 1
    return out_k[:m], out_v[:m]


def xy(keys, vals, r, s):
    cdef const uint64_t[::1] kv = keys
    cdef const double[::1] hv = vals
    cdef uint64_t ru = r, su = s
    cdef uint64_t rowbase = ru << SHIFT
    cdef Py_ssize_t nk_ = kv.shape[0]
    cdef const uint64_t* kp = &kv[0] if nk_ else NULL
    cdef Py_ssize_t n0 = lower_bound(kp, nk_, <uint64_t>1 << SHIFT)
    cdef Py_ssize_t lo = lower_bound(kp, nk_, rowbase)
    cdef Py_ssize_t hi = lower_bound(kp, nk_, (ru + 1) << SHIFT)
    cdef Py_ssize_t i, j
    cdef uint64_t q
    cdef double x = 0.0, y = 0.0
    with nogil:
        for i in range(n0):
            q = kv[i]
            if popc(q & ru) & 1:
                x += hv[i] * hv[i]
                if hi > lo:
                    j = find(kp + lo, hi - lo, rowbase | (q ^ su))
                    if j >= 0:
                        j += lo
                        y += 2.0 * rot_sign(0, q, ru, su) * hv[j] * hv[i]
        for i in range(lo, hi):
            q = kv[i] & QMASK
            if popc((q ^ su) & ru) & 1:
                x -= hv[i] * hv[i]
    return x, y


def row_sq_norms(keys, vals):
    cdef const uint64_t[::1] kv = keys
    cdef const double[::1] hv = vals
    cdef Py_ssize_t n = kv.shape[0], i, m = -1
    rows = np.empty(n, np.uint64)
    norms = np.empty(n)
    cdef uint64_t[::1] rw = rows
    cdef double[::1] nm = norms
    cdef uint64_t p, last = 0
    with nogil:
        for i in range(n):
            p = kv[i] >> SHIFT
            if m < 0 or p != last:
                m += 1
                rw[m] = p
                nm[m] = 0.0
                last = p
            nm[m] += hv[i] * hv[i]
    return rows[:m + 1], norms[:m + 1]


def bucket_best_s(diag_q, diag_h, row_q, row_h, r, bint weighted):
    cdef const uint64_t[::1] dq = np.ascontiguousarray(diag_q, dtype=np.uint64)
    cdef const double[::1] dh = np.ascontiguousarray(diag_h, dtype=np.float64)
    cdef const uint64_t[::1] rq = np.ascontiguousarray(row_q, dtype=np.uint64)
    cdef const double[::1] rh = np.ascontiguousarray(row_h, dtype=np.float64)
    cdef uint64_t ru = r
    cdef unordered_map[uint64_t, double] acc
    cdef Py_ssize_t i, j, nd = dq.shape[0], nr = rq.shape[0]
    cdef double w, best_w = -1.0
    cdef uint64_t best_s = 0
    cdef bint any_pair = False
    cdef pair[uint64_t, double] item
    if nr == 0:
        return -1, 0.0
    with nogil:
        for i in range(nd):
            if (popc(dq[i] & ru) & 1) == 0:
                continue
            any_pair = True
            w = dh[i] if dh[i] >= 0 else -dh[i]
            for j in range(nr):
                if weighted:
                    acc[dq[i] ^ rq[j]] += w * (rh[j] if rh[j] >= 0 else -rh[j])
                else:
                    acc[dq[i] ^ rq[j]] += 1.0
        for item in acc:
            if item.second > best_w or (item.second == best_w and item.first < best_s):
                best_w = item.second
                best_s = item.first
    if not any_pair:
        return -1, 0.0
    return int(best_s), float(best_w)


ctypedef fused scalar_t:
    double
    double complex


cdef void _fwht_row(scalar_t[::1] v) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], h = 1, i, j
    cdef scalar_t a, b
    while h < n:
        i = 0
        while i < n:
            for j in range(i, i + h):
                a = v[j]
                b = v[j + h]
                v[j] = a + b
                v[j + h] = a - b
            i += 2 * h
        h *= 2


def _fwht_2d(scalar_t[:, ::1] m):
    cdef Py_ssize_t r
    for r in range(m.shape[0]):
        _fwht_row(m[r])


def fwht(v):
    n = v.shape[v.ndim - 1]
    if n == 0 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    if not v.flags.c_contiguous:
        raise ValueError("fwht needs a C-contiguous array")
    if v.dtype == np.float64 or v.dtype == np.complex128:
        _fwht_2d(v.reshape(-1, n))
        return v
    raise TypeError(f"fwht supports float64/complex128, got {v.dtype}")


def xor_gather(m):
    m = np.ascontiguousarray(m, dtype=np.complex128)
    cdef const double complex[:, ::1] src = m
    cdef Py_ssize_t n = src.shape[0], p, i
    out = np.empty((n, n), np.complex128)
    cdef double complex[:, ::1] dst = out
    with nogil:
        for p in range(n):
            for i in range(n):
                dst[p, i] = src[p ^ i, i]
    return out


def xor_gather_inplace(m):
    if m.dtype != np.complex128 or not m.flags.c_contiguous:
        raise TypeError("in-place gather needs a C-contiguous complex128 array")
    cdef double complex[:, ::1] a = m
    cdef Py_ssize_t n = a.shape[0], p, i, pp
    cdef double complex tmp
    with nogil:
        for i in range(1, n):
            for p in range(n):
                pp = p ^ i
                if p < pp:
                    tmp = a[p, i]
                    a[p, i] = a[pp, i]
                    a[pp, i] = tmp
    return m


def jacobi_round(a, lo, hi):
    cdef double complex[:, ::1] m = a
    # real view: entry (i, j) is (r[i, 2j], r[i, 2j + 1])
    cdef double[:, ::1] r = a.view(np.float64)
    cdef const Py_ssize_t[::1] lv = np.ascontiguousarray(lo, dtype=np.intp)
    cdef const Py_ssize_t[::1] hv = np.ascontiguousarray(hi, dtype=np.intp)
    cdef Py_ssize_t n = m.shape[0], npairs = lv.shape[0], i, j, k, l, h, nact = 0
    par = np.empty((npairs, 6))
    idx = np.empty((npairs, 2), np.intp)
    cdef double[:, ::1] pr = par
    cdef Py_ssize_t[:, ::1] act = idx
    cdef double complex apq
    cdef double mag, tau, t, c, s, pre, pim, xr, xi, yr, yi
    with nogil:
        for k in range(npairs):
            l = lv[k]
            h = hv[k]
            apq = m[l, h]
            mag = sqrt(apq.real * apq.real + apq.imag * apq.imag)
            if mag == 0.0:
                continue
            tau = (m[h, h].real - m[l, l].real) / (2.0 * mag)
            t = (1.0 if tau >= 0 else -1.0) / (fabs(tau) + sqrt(1.0 + tau * tau))
            c = 1.0 / sqrt(1.0 + t * t)
            s = t * c
            pre = apq.real / mag
            pim = apq.imag / mag
            pr[nact, 0] = c
            pr[nact, 1] = s
            pr[nact, 2] = s * pre
            pr[nact, 3] = s * pim
            pr[nact, 4] = c * pre
            pr[nact, 5] = c * pim
            act[nact, 0] = l
            act[nact, 1] = h
            nact += 1
        # columns first: x' = c x - s conj(ph) y, y' = s x + c conj(ph) y
        for i in range(n):
            for j in range(nact):
                l = 2 * act[j, 0]
                h = 2 * act[j, 1]
                c = pr[j, 0]
                s = pr[j, 1]
                xr = r[i, l]
                xi = r[i, l + 1]
                yr = r[i, h]
                yi = r[i, h + 1]
                r[i, l] = c * xr - (pr[j, 2] * yr + pr[j, 3] * yi)
                r[i, l + 1] = c * xi - (pr[j, 2] * yi - pr[j, 3] * yr)
                r[i, h] = s * xr + (pr[j, 4] * yr + pr[j, 5] * yi)
                r[i, h + 1] = s * xi + (pr[j, 4] * yi - pr[j, 5] * yr)
        # then rows: x' = c x - s ph y, y' = s x + c ph y
        for j in range(nact):
            l = act[j, 0]
            h = act[j, 1]
            c = pr[j, 0]
            s = pr[j, 1]
            for i in range(0, 2 * n, 2):
                xr = r[l, i]
                xi = r[l, i + 1]
                yr = r[h, i]
                yi = r[h, i + 1]
                r[l, i] = c * xr - (pr[j, 2] * yr - pr[j, 3] * yi)
                r[l, i + 1] = c * xi - (pr[j, 2] * yi + pr[j, 3] * yr)
                r[h, i] = s * xr + (pr[j, 4] * yr - pr[j, 5] * yi)
                r[h, i + 1] = s * xi + (pr[j, 4] * yi + pr[j, 5] * yr)
            m[h, l] = 0.0
            m[l, h] = 0.0
