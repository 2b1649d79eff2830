"""Pure-numpy fallback for the compiled kernel core.

Same signatures and same numerical contracts as fieldwork._kernels: the
diagonal of symmetric outputs is written exactly (no roundoff from the
GEMM-based distance expansion leaks into zero distances).
"""

import numpy as np


def sq_dists(a, b):
    """Pairwise squared Euclidean distances, shape (len(a), len(b))."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    a2 = np.einsum("ij,ij->i", a, a)
    b2 = np.einsum("ij,ij->i", b, b)
    d2 = a2[:, None] + b2[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def sq_dists_sym(a):
    """Symmetric pairwise squared distances with an exactly-zero diagonal."""
    d2 = sq_dists(a, a)
    np.fill_diagonal(d2, 0.0)
    return d2


def se_from_sq(d2, l, sf2):
    """Elementwise sf2 * exp(-d2 / (2 l^2)) over a squared-distance matrix."""
    return sf2 * np.exp(d2 * (-0.5 / (l * l)))


def se_cross(a, b, l, sf2):
    """Squared-exponential cross-covariance matrix, shape (len(a), len(b))."""
    return se_from_sq(sq_dists(a, b), l, sf2)


def se_sym(a, l, sf2, diag_add):
    """Symmetric squared-exponential matrix with diag set to sf2 + diag_add."""
    k = se_from_sq(sq_dists_sym(a), l, sf2)
    np.fill_diagonal(k, sf2 + diag_add)
    return k
