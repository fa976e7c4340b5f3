# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`acw._kernels_py` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline int64_t _add_flat(int64_t a, int64_t b, int sign, const int64_t[:] moduli,
                              const int64_t[:] strides, Py_ssize_t k) nogil:
    cdef int64_t out = 0, n, s, da, db, v
    cdef Py_ssize_t i
    if k == 1:
        n = moduli[0]
        v = (a + sign * b) % n
        if v < 0:
            v += n
        return v
    for i in range(k):
        n = moduli[i]
        s = strides[i]
        da = (a // s) % n
        db = (b // s) % n
        v = (da + sign * db) % n
        if v < 0:
            v += n
        out += v * s
    return out


def conv_direct(const int64_t[:] idx_p, const double[:] p, const int64_t[:] idx_q,
                const double[:] q, const int64_t[:] moduli, const int64_t[:] strides,
                int64_t order, int sign):
    """Law of a + sign*b for independent a~p, b~q as (sorted idx, masses)."""
    cdef Py_ssize_t np_ = idx_p.shape[0], nq = idx_q.shape[0], k = moduli.shape[0]
    cdef Py_ssize_t i, j, ntouch = 0
    cdef int64_t t
    cdef double pi
    acc_arr = np.zeros(order, dtype=np.float64)
    seen_arr = np.zeros(order, dtype=np.uint8)
    touched_arr = np.empty(min(<int64_t>(np_ * nq), order), dtype=np.int64)
    cdef double[:] acc = acc_arr
    cdef unsigned char[:] seen = seen_arr
    cdef int64_t[:] touched = touched_arr
    with nogil:
        for i in range(np_):
            pi = p[i]
            for j in range(nq):
                t = _add_flat(idx_p[i], idx_q[j], sign, moduli, strides, k)
                if not seen[t]:
                    seen[t] = 1
                    touched[ntouch] = t
                    ntouch += 1
                acc[t] += pi * q[j]
    out_idx = np.sort(touched_arr[:ntouch])
    return out_idx, acc_arr[out_idx]


cdef _decode(const int64_t[:] idx, const int64_t[:] moduli, const int64_t[:] strides, int sign):
    """Per-element coordinates, negated mod n when sign is -1."""
    cdef Py_ssize_t n = idx.shape[0], k = moduli.shape[0], i, c
    out_arr = np.empty((n, k), dtype=np.int64)
    cdef int64_t[:, :] out = out_arr
    cdef int64_t v
    for i in range(n):
        for c in range(k):
            v = (idx[i] // strides[c]) % moduli[c]
            if sign < 0 and v != 0:
                v = moduli[c] - v
            out[i, c] = v
    return out_arr


def sumset_mask(const int64_t[:] idx_a, const int64_t[:] idx_b, const int64_t[:] moduli,
                const int64_t[:] strides, int64_t order, int sign):
    """Boolean mask (uint8) of {a + sign*b}."""
    cdef Py_ssize_t na = idx_a.shape[0], nb = idx_b.shape[0], k = moduli.shape[0]
    cdef Py_ssize_t i, j, c
    cdef int64_t flat, v
    cdef int64_t[:, :] ca = _decode(idx_a, moduli, strides, 1)
    cdef int64_t[:, :] cb = _decode(idx_b, moduli, strides, sign)
    mask_arr = np.zeros(order, dtype=np.uint8)
    cdef unsigned char[:] mask = mask_arr
    with nogil:
        for i in range(na):
            for j in range(nb):
                flat = 0
                for c in range(k):
                    v = ca[i, c] + cb[j, c]
                    if v >= moduli[c]:
                        v -= moduli[c]
                    flat += v * strides[c]
                mask[flat] = 1
    return mask_arr


def bohr_maxdist(const int64_t[:, :] weights, int64_t lcm, const int64_t[:] moduli,
                 const int64_t[:] strides, int64_t order, int64_t cutoff):
    """Per element x, max over characters of the phase distance min(k, L-k).

    Scanning a given x stops as soon as the running max exceeds ``cutoff``;
    the stored value is then some number > cutoff.
    """
    cdef Py_ssize_t m = weights.shape[0], k = moduli.shape[0]
    cdef Py_ssize_t c, i
    cdef int64_t x, ph, d, best
    out_arr = np.zeros(order, dtype=np.int64)
    cdef int64_t[:] out = out_arr
    coords_arr = np.zeros(k, dtype=np.int64)
    cdef int64_t[:] xc = coords_arr
    with nogil:
        for x in range(order):
            for i in range(k):
                xc[i] = (x // strides[i]) % moduli[i]
            best = 0
            for c in range(m):
                ph = 0
                for i in range(k):
                    ph = (ph + weights[c, i] * xc[i]) % lcm
                d = ph if ph <= lcm - ph else lcm - ph
                if d > best:
                    best = d
                    if best > cutoff:
                        break
            out[x] = best
    return out_arr
