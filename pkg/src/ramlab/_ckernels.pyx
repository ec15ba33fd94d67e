# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled truncated power-series kernels over F_{p^m}.

Series are int64 arrays of shape (N+1, m): row d holds the coefficient of
t**d in the power basis of F_p[y]/(modulus).  ``modulus`` is the monic
modulus as an int64 array of length m+1 (ignored when m == 1).
"""

import numpy as np
cimport numpy as cnp

ctypedef long long i64


cdef inline void _reduce_elem(i64* acc, int m, i64 p, const i64* mod) noexcept nogil:
    # acc has 2m-1 slots; fold degrees >= m using y^m = -(mod[0] + ... + mod[m-1] y^{m-1})
    cdef int e, j
    cdef i64 c
    for e in range(2 * m - 2, m - 1, -1):
        c = acc[e] % p
        acc[e] = 0
        if c:
            for j in range(m):
                acc[e - m + j] = (acc[e - m + j] - c * mod[j]) % p
    for e in range(m):
        acc[e] = acc[e] % p
        if acc[e] < 0:
            acc[e] += p


cdef void _mul_trunc_into(const i64[:, ::1] a, int alen, const i64[:, ::1] b, int bstart, int blen,
                          i64[:, ::1] out, int outlen, int m, i64 p, const i64* mod,
                          i64* acc) noexcept nogil:
    """out[d] = sum_j b[j] * a[d-j] for d < outlen, with bstart <= j < blen and d-j < alen."""
    cdef int d, j, x, y, jlo, jhi
    cdef i64 s, bv
    cdef const i64* ap
    cdef const i64* bp
    if m == 1:
        ap = &a[0, 0]
        bp = &b[0, 0]
        for d in range(outlen):
            jlo = d - alen + 1
            if jlo < bstart:
                jlo = bstart
            jhi = d if d < blen - 1 else blen - 1
            s = 0
            for j in range(jlo, jhi + 1):
                s += bp[j] * ap[d - j]
            out[d, 0] = s % p
        return
    for d in range(outlen):
        for x in range(2 * m - 1):
            acc[x] = 0
        jlo = d - alen + 1
        if jlo < bstart:
            jlo = bstart
        jhi = d if d < blen - 1 else blen - 1
        for j in range(jlo, jhi + 1):
            for x in range(m):
                bv = b[j, x]
                if bv == 0:
                    continue
                for y in range(m):
                    acc[x + y] += bv * a[d - j, y]
        _reduce_elem(acc, m, p, mod)
        for x in range(m):
            out[d, x] = acc[x]


def compose(f, g, long long p, modulus=None):
    """Coefficients of f(g(t)) mod t^(N+1); g must have zero constant term."""
    cdef const i64[:, ::1] fv = np.ascontiguousarray(f, dtype=np.int64)
    cdef const i64[:, ::1] gv = np.ascontiguousarray(g, dtype=np.int64)
    cdef int N = fv.shape[0] - 1
    cdef int m = fv.shape[1]
    cdef int k, L, x
    cdef const i64[::1] modv = np.zeros(m + 1, dtype=np.int64) if modulus is None else np.ascontiguousarray(modulus, dtype=np.int64)
    cdef i64[::1] acc = np.zeros(2 * m, dtype=np.int64)
    r_arr = np.zeros((N + 1, m), dtype=np.int64)
    t_arr = np.zeros((N + 1, m), dtype=np.int64)
    cdef i64[:, ::1] r = r_arr
    cdef i64[:, ::1] tmp = t_arr
    cdef i64[:, ::1] swap
    # Horner: r_k = f_k + g * r_{k+1}, only needed mod t^(N-k+1)
    for x in range(m):
        r[0, x] = fv[N, x]
    with nogil:
        for k in range(N - 1, -1, -1):
            L = N - k
            _mul_trunc_into(r, L, gv, 1, N + 1, tmp, L + 1, m, p, &modv[0], &acc[0])
            for x in range(m):
                tmp[0, x] = (tmp[0, x] + fv[k, x]) % p
            swap = r
            r = tmp
            tmp = swap
    return np.asarray(r).copy()


def mul_trunc(a, b, long long p, modulus=None):
    """Product of two series truncated to the length of ``a``."""
    cdef const i64[:, ::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef const i64[:, ::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef int n = av.shape[0]
    cdef int m = av.shape[1]
    cdef const i64[::1] modv = np.zeros(m + 1, dtype=np.int64) if modulus is None else np.ascontiguousarray(modulus, dtype=np.int64)
    cdef i64[::1] acc = np.zeros(2 * m, dtype=np.int64)
    out = np.zeros((n, m), dtype=np.int64)
    cdef i64[:, ::1] ov = out
    with nogil:
        _mul_trunc_into(av, n, bv, 0, bv.shape[0], ov, n, m, p, &modv[0], &acc[0])
    return out
