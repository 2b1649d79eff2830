# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core: pairwise distances and squared-exponential matrices.

Fused single-pass loops avoid the temporaries of the numpy fallback and
exploit symmetry, which pays off at the small-to-medium matrix sizes the
sampling loop produces. Signatures mirror fieldwork._kernels_py exactly.
"""

from libc.math cimport exp

import numpy as np


def sq_dists(double[:, ::1] a, double[:, ::1] b):
    """Pairwise squared Euclidean distances, shape (len(a), len(b))."""
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                acc += diff * diff
            o[i, j] = acc
    return out


def sq_dists_sym(double[:, ::1] a):
    """Symmetric pairwise squared distances with an exactly-zero diagonal."""
    cdef Py_ssize_t n = a.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        o[i, i] = 0.0
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - a[j, k]
                acc += diff * diff
            o[i, j] = acc
            o[j, i] = acc
    return out


def se_from_sq(double[:, ::1] d2, double l, double sf2):
    """Elementwise sf2 * exp(-d2 / (2 l^2)) over a squared-distance matrix."""
    cdef Py_ssize_t n = d2.shape[0], m = d2.shape[1]
    cdef Py_ssize_t i, j
    cdef double inv = -0.5 / (l * l)
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        for j in range(m):
            o[i, j] = sf2 * exp(d2[i, j] * inv)
    return out


def se_cross(double[:, ::1] a, double[:, ::1] b, double l, double sf2):
    """Squared-exponential cross-covariance matrix, shape (len(a), len(b))."""
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    cdef double inv = -0.5 / (l * l)
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                acc += diff * diff
            o[i, j] = sf2 * exp(acc * inv)
    return out


def se_sym(double[:, ::1] a, double l, double sf2, double diag_add):
    """Symmetric squared-exponential matrix with diag set to sf2 + diag_add.

    Only the upper triangle is evaluated; the diagonal is written exactly
    (zero distance never goes through exp), matching the fallback.
    """
    cdef Py_ssize_t n = a.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, v
    cdef double inv = -0.5 / (l * l)
    cdef double diag = sf2 + diag_add
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        o[i, i] = diag
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - a[j, k]
                acc += diff * diff
            v = sf2 * exp(acc * inv)
            o[i, j] = v
            o[j, i] = v
    return out
