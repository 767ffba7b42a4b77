# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled greedy landmark scan.

Same contract as clasmk._greedy_py.greedy_select; see that module for the
algorithm description.  This version keeps the kernel-column evaluation,
forward substitution and Cholesky growth in tight C loops.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

FAMILY_RBF = 0
FAMILY_POLY = 1

cdef double _TOL_FLOOR = 1e-12


cdef inline double _kval(const double[:, ::1] X, Py_ssize_t a, Py_ssize_t b,
                         int family, double param, const double[::1] sq) nogil:
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t j
    cdef double dot = 0.0
    cdef double base, out
    cdef int d, k
    for j in range(p):
        dot += X[a, j] * X[b, j]
    if family == 0:
        base = sq[a] + sq[b] - 2.0 * dot
        if base < 0.0:
            base = 0.0
        return exp(-base / (param * param))
    base = (1.0 + dot) / sqrt((1.0 + sq[a]) * (1.0 + sq[b]))
    d = <int> param
    out = 1.0
    for k in range(d):
        out *= base
    return out


def greedy_select(X, int family, double param, double tol, int max_rank):
    """Return the indices of greedily admitted landmark rows of X."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xc = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] Xv = Xc
    cdef Py_ssize_t n = Xv.shape[0]
    cdef double thresh = tol if tol > _TOL_FLOOR else _TOL_FLOOR

    cdef cnp.ndarray[cnp.float64_t, ndim=1] sq_arr = np.einsum("ij,ij->i", Xc, Xc)
    cdef const double[::1] sq = sq_arr

    cdef cnp.ndarray[cnp.float64_t, ndim=2] L_arr = np.zeros((max_rank, max_rank))
    cdef double[:, ::1] L = L_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sel_arr = np.empty(max_rank, dtype=np.int64)
    cdef cnp.int64_t[::1] sel = sel_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z_arr = np.empty(max_rank)
    cdef double[::1] z = z_arr

    cdef Py_ssize_t i, r, c
    cdef int m = 0
    cdef double acc, r2

    with nogil:
        for i in range(n):
            if m == 0:
                L[0, 0] = 1.0  # normalized kernels: k(x, x) = 1
                sel[0] = i
                m = 1
            else:
                # forward substitution L z = k(X_sel, x_i), fused with the
                # kernel-column evaluation
                r2 = 1.0
                for r in range(m):
                    acc = _kval(Xv, sel[r], i, family, param, sq)
                    for c in range(r):
                        acc -= L[r, c] * z[c]
                    acc /= L[r, r]
                    z[r] = acc
                    r2 -= acc * acc
                if r2 > thresh:
                    for c in range(m):
                        L[m, c] = z[c]
                    L[m, m] = sqrt(r2 if r2 > 1e-15 else 1e-15)
                    sel[m] = i
                    m += 1
            if m == max_rank:
                break

    return sel_arr[:m].copy()
