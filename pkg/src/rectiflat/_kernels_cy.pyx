# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled O(n^3) hot kernels; drop-in for :mod:`rectiflat._kernels_py`."""

import numpy as np

BACKEND = "cython"


def excess_sum_max(const double[:, ::1] D, const double[::1] w):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double a, b, c, m, e, wi, wij
    cdef double total = 0.0
    cdef double emax = 0.0
    if n < 3:
        return 0.0, 0.0
    for i in range(n - 2):
        wi = w[i]
        for j in range(i + 1, n - 1):
            a = D[i, j]
            wij = wi * w[j]
            for k in range(j + 1, n):
                b = D[j, k]
                c = D[i, k]
                m = a
                if b > m:
                    m = b
                if c > m:
                    m = c
                e = a + b + c - 2.0 * m
                if e < 0.0:
                    e = 0.0
                if e > emax:
                    emax = e
                total += wij * w[k] * e
    return 6.0 * total, emax


def excess_through_points(const double[:, ::1] D, const double[::1] w):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t p, a_, b_
    cdef double da, db, dab, m, e, acc
    out = np.zeros(n)
    cdef double[::1] o = out
    for p in range(n):
        acc = 0.0
        for a_ in range(n):
            da = D[p, a_]
            for b_ in range(a_ + 1, n):
                db = D[p, b_]
                dab = D[a_, b_]
                m = da
                if db > m:
                    m = db
                if dab > m:
                    m = dab
                e = da + db + dab - 2.0 * m
                if e < 0.0:
                    e = 0.0
                acc += 2.0 * w[a_] * w[b_] * e
        o[p] = acc
    return out


def excess_through_pairs(const double[:, ::1] D, const double[::1] w):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t p, q, x
    cdef double a, b, c, m, e, acc
    out = np.zeros((n, n))
    cdef double[:, ::1] o = out
    for p in range(n):
        for q in range(p + 1, n):
            a = D[p, q]
            acc = 0.0
            for x in range(n):
                b = D[q, x]
                c = D[p, x]
                m = a
                if b > m:
                    m = b
                if c > m:
                    m = c
                e = a + b + c - 2.0 * m
                if e < 0.0:
                    e = 0.0
                acc += w[x] * e
            o[p, q] = acc
            o[q, p] = acc
    return out


def triangle_violation(const double[:, ::1] D):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double v
    cdef double worst = -np.inf
    for j in range(n):
        for i in range(n):
            for k in range(n):
                v = D[i, k] - D[i, j] - D[j, k]
                if v > worst:
                    worst = v
    return worst
