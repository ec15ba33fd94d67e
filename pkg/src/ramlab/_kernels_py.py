"""Pure-Python (numpy) versions of the compiled series kernels.

Same array conventions as ``_ckernels``.  Coefficients in F_{p^m} are
multiplied by Kronecker substitution: each element occupies a slot of
width 2m-1 so one ``np.convolve`` multiplies whole series.
"""

import numpy as np


def _pack(a, m):
    if m == 1:
        return a[:, 0]
    width = 2 * m - 1
    packed = np.zeros((a.shape[0], width), dtype=np.int64)
    packed[:, :m] = a
    return packed.reshape(-1)


def _unpack(flat, n, m, p, modulus):
    if m == 1:
        out = np.zeros((n, 1), dtype=np.int64)
        k = min(n, flat.shape[0])
        out[:k, 0] = flat[:k] % p
        return out
    width = 2 * m - 1
    rows = np.zeros((n, width), dtype=np.int64)
    k = min(n * width, flat.shape[0])
    rows.reshape(-1)[:k] = flat[:k]
    rows %= p
    low = np.asarray(modulus[:m], dtype=np.int64)
    for e in range(width - 1, m - 1, -1):
        c = rows[:, e].copy()
        rows[:, e] = 0
        rows[:, e - m:e] -= np.outer(c, low)
        rows %= p
    return rows[:, :m].copy()


def mul_trunc(a, b, p, modulus=None):
    """Product of two series truncated to the length of ``a``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n, m = a.shape
    prod = np.convolve(_pack(a, m), _pack(b[:n], m))
    return _unpack(prod, n, m, p, modulus)


def compose(f, g, p, modulus=None):
    """Coefficients of f(g(t)) mod t^(N+1); g must have zero constant term."""
    f = np.asarray(f, dtype=np.int64)
    g = np.asarray(g, dtype=np.int64)
    N = f.shape[0] - 1
    m = f.shape[1]
    gp = _pack(g, m)
    width = 1 if m == 1 else 2 * m - 1
    r = f[N:N + 1].copy()
    for k in range(N - 1, -1, -1):
        L = N - k
        # g * r_{k+1} restricted to degrees 1..L
        prod = np.convolve(gp[width:(L + 1) * width], _pack(r[:L], m))
        tmp = np.zeros((L + 1, m), dtype=np.int64)
        tmp[1:] = _unpack(prod, L, m, p, modulus)
        tmp[0] = (tmp[0] + f[k]) % p
        r = tmp
    return r
