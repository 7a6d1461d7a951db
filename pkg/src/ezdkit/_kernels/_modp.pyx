# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Prime-field kernels: in-place RREF and the invertible-combination search.

Entries are int64 values already reduced into [0, p).  Callers guarantee
p < 2**24 so that every product fits comfortably in 64 bits.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline int64_t _inv(int64_t a, int64_t p) noexcept nogil:
    cdef int64_t t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


cdef Py_ssize_t _rref(int64_t[:, ::1] a, int64_t p, Py_ssize_t* piv_out) noexcept nogil:
    cdef Py_ssize_t nr = a.shape[0], nc = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef int64_t inv, f, t
    for c in range(nc):
        if r == nr:
            break
        piv = -1
        for i in range(r, nr):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, nc):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        inv = _inv(a[r, c], p)
        if inv != 1:
            for j in range(c, nc):
                a[r, j] = (a[r, j] * inv) % p
        for i in range(nr):
            if i != r:
                f = a[i, c]
                if f != 0:
                    for j in range(c, nc):
                        t = a[i, j] - (f * a[r, j]) % p
                        if t < 0:
                            t += p
                        a[i, j] = t
        piv_out[r] = c
        r += 1
    return r


def rref_inplace(int64_t[:, ::1] a, int64_t p):
    """Bring ``a`` to reduced row echelon form mod p; return the pivot columns."""
    cdef Py_ssize_t n = min(a.shape[0], a.shape[1])
    cdef cnp.ndarray[cnp.intp_t, ndim=1] buf = np.empty(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t* pv = <Py_ssize_t*> buf.data
    cdef Py_ssize_t r
    with nogil:
        r = _rref(a, p, pv)
    return [int(buf[i]) for i in range(r)]


cdef bint _full_rank(int64_t[:, ::1] m, int64_t p) noexcept nogil:
    # destructive; m is n x n
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t c, i, j, piv
    cdef int64_t inv, f, t
    for c in range(n):
        piv = -1
        for i in range(c, n):
            if m[i, c] != 0:
                piv = i
                break
        if piv < 0:
            return False
        if piv != c:
            for j in range(c, n):
                t = m[c, j]
                m[c, j] = m[piv, j]
                m[piv, j] = t
        inv = _inv(m[c, c], p)
        for i in range(c + 1, n):
            f = m[i, c]
            if f != 0:
                f = (f * inv) % p
                for j in range(c, n):
                    t = m[i, j] - (f * m[c, j]) % p
                    if t < 0:
                        t += p
                    m[i, j] = t
    return True


cdef bint _advance(int64_t[::1] coeff, Py_ssize_t lo, Py_ssize_t hi, int64_t radix) noexcept nogil:
    # odometer over positions lo .. hi-1, last fastest; False when it wraps
    cdef Py_ssize_t k = hi - 1
    while k >= lo:
        coeff[k] += 1
        if coeff[k] < radix:
            return True
        coeff[k] = 0
        k -= 1
    return False


def first_invertible(int64_t[:, :, ::1] basis, int64_t p, int64_t limit,
                     int64_t grid=0, bint singular=False):
    """Search span(basis) for a nonsingular (or, with ``singular``, a singular)
    matrix.

    With ``grid == 0`` one point per projective line is visited: leading
    coefficient position first, then the trailing coefficients as an odometer
    with the last index fastest.  With ``0 < grid`` every nonzero vector in
    {0..grid-1}^h is visited in odometer order.  Returns
    ``(coeffs or None, points_visited)``; gives up after ``limit`` points.
    """
    cdef Py_ssize_t h = basis.shape[0], n = basis.shape[1]
    cdef Py_ssize_t lead, k, i, j, lo
    cdef int64_t visited = 0, radix
    cdef cnp.ndarray[cnp.int64_t, ndim=1] coeff_arr = np.zeros(h, dtype=np.int64)
    cdef int64_t[::1] coeff = coeff_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=2] work_arr = np.zeros((n, n), dtype=np.int64)
    cdef int64_t[:, ::1] work = work_arr
    cdef int64_t acc
    cdef bint found = False, more, full
    if h == 0:
        return None, 0
    if n == 0:
        if singular:
            return None, 1
        return [1] + [0] * (h - 1), 1
    radix = grid if grid > 0 else p
    with nogil:
        for lead in range(h if grid == 0 else 1):
            for k in range(h):
                coeff[k] = 0
            if grid == 0:
                coeff[lead] = 1
                lo = lead + 1
            else:
                coeff[h - 1] = 1
                lo = 0
            more = True
            while more:
                if visited >= limit:
                    break
                visited += 1
                for i in range(n):
                    for j in range(n):
                        acc = 0
                        for k in range(h):
                            if coeff[k] != 0:
                                acc = (acc + coeff[k] * basis[k, i, j]) % p
                        work[i, j] = acc
                full = _full_rank(work, p)
                if full != singular:
                    found = True
                    break
                more = _advance(coeff, lo, h, radix)
            if found or visited >= limit:
                break
    if found:
        return [int(coeff_arr[k]) for k in range(h)], int(visited)
    return None, int(visited)
