# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the period-product loops (see _fallback for semantics)."""

import numpy as np
from libc.math cimport cos, sin, sqrt
from scipy.linalg.cython_blas cimport zgemm


def chain_apply(double complex[:, :, ::1] mats, Py_ssize_t[::1] idx,
                double complex[:, ::1] kicks, double complex[:, ::1] y):
    cdef int n = <int> y.shape[0]
    cdef int ncol = <int> y.shape[1]
    cdef Py_ssize_t nj = idx.shape[0]
    cdef Py_ssize_t j, r, c
    cdef double complex alpha = 1.0
    cdef double complex beta = 0.0
    cdef char trans = b'N'
    cur_arr = np.empty((n, ncol), dtype=np.complex128)
    nxt_arr = np.empty((n, ncol), dtype=np.complex128)
    cdef double complex[:, ::1] cur = cur_arr
    cdef double complex[:, ::1] nxt = nxt_arr
    cdef double complex[:, ::1] tmp
    for r in range(n):
        for c in range(ncol):
            cur[r, c] = kicks[0, r] * y[r, c]
    for j in range(nj):
        # row-major C = M @ cur is column-major C^T = cur^T @ M^T
        zgemm(&trans, &trans, &ncol, &n, &n, &alpha, &cur[0, 0], &ncol,
              &mats[idx[j], 0, 0], &n, &beta, &nxt[0, 0], &ncol)
        for r in range(n):
            for c in range(ncol):
                nxt[r, c] = nxt[r, c] * kicks[j + 1, r]
        tmp = cur
        cur = nxt
        nxt = tmp
    return np.asarray(cur).copy()


def bloch_product(double complex[:, ::1] beta, double[::1] h):
    cdef Py_ssize_t n_s = beta.shape[0]
    cdef Py_ssize_t n_k = beta.shape[1]
    out_arr = np.empty((n_k, 2, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef Py_ssize_t s, k
    cdef double complex u00, u01, u10, u11, e01, e10, bs, n00, n01, n10, n11
    cdef double mod, cs, sinc
    for k in range(n_k):
        u00 = 1.0
        u01 = 0.0
        u10 = 0.0
        u11 = 1.0
        for s in range(n_s):
            bs = beta[s, k]
            mod = sqrt(bs.real * bs.real + bs.imag * bs.imag)
            cs = cos(mod * h[s])
            if mod > 0:
                sinc = sin(mod * h[s]) / mod
            else:
                sinc = h[s]
            e01 = -1j * sinc * bs
            e10 = -1j * sinc * bs.conjugate()
            n00 = cs * u00 + e01 * u10
            n01 = cs * u01 + e01 * u11
            n10 = e10 * u00 + cs * u10
            n11 = e10 * u01 + cs * u11
            u00 = n00
            u01 = n01
            u10 = n10
            u11 = n11
        out[k, 0, 0] = u00
        out[k, 0, 1] = u01
        out[k, 1, 0] = u10
        out[k, 1, 1] = u11
    return out_arr
