# cython: language_level=3
"""Compiled Grünwald-Letnikov kernels.

Every routine here has a twin in ``_pykernels`` with the same floating-point
operation order, so the two backends agree bit for bit.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def gl_table(const double[::1] alphas, Py_ssize_t horizon):
    cdef Py_ssize_t d = alphas.shape[0]
    cdef Py_ssize_t i, j
    out = np.empty((horizon + 1, d), dtype=np.float64)
    cdef double[:, ::1] t = out
    for i in range(d):
        t[0, i] = 1.0
    for j in range(1, horizon + 1):
        for i in range(d):
            t[j, i] = t[j - 1, i] * (((<double>(j - 1)) - alphas[i]) / <double>j)
    return out


def lagged_sum(const double[:, ::1] table, const double[:, ::1] states, Py_ssize_t offset):
    """Sum of ``table[j] * states[n - 1 + offset - j]`` for j = offset .. n - 1 + offset."""
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t d = states.shape[1]
    cdef Py_ssize_t i, j, last = n - 1 + offset
    out = np.zeros(d, dtype=np.float64)
    cdef double[::1] acc = out
    with nogil:
        for j in range(offset, last + 1):
            for i in range(d):
                acc[i] += table[j, i] * states[last - j, i]
    return out


def gl_filter(const double[:, ::1] table, const double[:, ::1] states):
    """Fractional difference of every prefix: row k is sum_j table[j] * states[k - j]."""
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t d = states.shape[1]
    cdef Py_ssize_t i, j, k
    out = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] acc = out
    with nogil:
        for k in range(n):
            for j in range(k + 1):
                for i in range(d):
                    acc[k, i] += table[j, i] * states[k - j, i]
    return out
