"""Pure numpy versions of the compiled prime-field kernels.

Same contracts as the Cython module: int64 arrays with entries in [0, p).
"""

import numpy as np


def rref_inplace(a, p):
    nr, nc = a.shape
    r = 0
    pivots = []
    for c in range(nc):
        if r == nr:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r, c:] = (a[r, c:] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            a[rows, c:] = (a[rows, c:] - np.outer(col[rows], a[r, c:])) % p
        pivots.append(c)
        r += 1
    return pivots


def _full_rank(m, p):
    n = m.shape[0]
    for c in range(n):
        nz = np.flatnonzero(m[c:, c])
        if nz.size == 0:
            return False
        piv = c + int(nz[0])
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
        inv = pow(int(m[c, c]), -1, p)
        f = (m[c + 1:, c] * inv) % p
        m[c + 1:, c:] = (m[c + 1:, c:] - np.outer(f, m[c, c:])) % p
    return True


def _odometer(coeff, lo, radix):
    k = len(coeff) - 1
    while k >= lo:
        coeff[k] += 1
        if coeff[k] < radix:
            return True
        coeff[k] = 0
        k -= 1
    return False


def _candidates(h, p, grid):
    if grid == 0:
        for lead in range(h):
            coeff = [0] * h
            coeff[lead] = 1
            while True:
                yield list(coeff)
                if not _odometer(coeff, lead + 1, p):
                    break
    else:
        coeff = [0] * h
        coeff[-1] = 1
        while True:
            yield list(coeff)
            if not _odometer(coeff, 0, grid):
                break


def first_invertible(basis, p, limit, grid=0, singular=False):
    h, n = basis.shape[0], basis.shape[1]
    if h == 0:
        return None, 0
    if n == 0:
        return (None, 1) if singular else ([1] + [0] * (h - 1), 1)
    visited = 0
    for coeff in _candidates(h, p, grid):
        if visited >= limit:
            return None, visited
        visited += 1
        m = np.tensordot(np.asarray(coeff, dtype=np.int64), basis, axes=1) % p
        if _full_rank(m, p) != singular:
            return coeff, visited
    return None, visited
