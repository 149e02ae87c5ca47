"""Small dense linear algebra over floats or jets.

Matrices are numpy arrays; generic routines accept dtype=object arrays
whose entries are jets (or plain floats) and rely only on ring
operations plus division by units, so the same code path serves exact
jet-valued frames and plain numeric work.  Pivoting decisions use only
the value parts.  Dimensions are tiny (at most 5), so the quadratic and
cubic loops are deliberate.
"""

from __future__ import annotations

import math

import numpy as np

from . import jets
from .jets import value_of


class LinalgError(ValueError):
    """Base class for numerical failures in this module."""


class SingularMatrixError(LinalgError):
    """Elimination met a pivot that is (numerically) zero in value."""


class DependentVectorsError(LinalgError):
    """Gram-Schmidt input was linearly dependent at working precision."""


class NotSPDError(LinalgError):
    """A matrix required to be symmetric positive definite is not."""


def mat_mul(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    n, m = A.shape
    m2, p = B.shape
    if m != m2:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    out = np.empty((n, p), dtype=object)
    for i in range(n):
        for j in range(p):
            s = A[i, 0] * B[0, j]
            for k in range(1, m):
                s = s + A[i, k] * B[k, j]
            out[i, j] = s
    return out


def mat_vec(A, v):
    A = np.asarray(A)
    n, m = A.shape
    out = np.empty(n, dtype=object)
    for i in range(n):
        s = A[i, 0] * v[0]
        for k in range(1, m):
            s = s + A[i, k] * v[k]
        out[i] = s
    return out


def dot(u, v):
    s = u[0] * v[0]
    for k in range(1, len(u)):
        s = s + u[k] * v[k]
    return s


def det(M):
    """Determinant by cofactor expansion (exact over the jet ring)."""
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError(f"not square: {M.shape}")
    if n == 1:
        return M[0, 0]
    if n == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    s = None
    cols = list(range(n))
    for j in range(n):
        minor = M[1:][:, cols[:j] + cols[j + 1 :]]
        term = M[0, j] * det(minor)
        if j % 2 == 1:
            term = -term
        s = term if s is None else s + term
    return s


def lu_invert(M):
    """Inverse by row reduction with partial pivoting on value parts."""
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError(f"not square: {M.shape}")
    work = np.empty((n, 2 * n), dtype=object)
    work[:, :n] = M
    work[:, n:] = 0.0
    for i in range(n):
        work[i, n + i] = 1.0
    scale = max(abs(value_of(M[i, j])) for i in range(n) for j in range(n))
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(work[r, col])))
        pval = abs(value_of(work[piv, col]))
        if pval <= 1e-13 * max(1.0, scale):
            raise SingularMatrixError(
                f"pivot {pval:.3e} in column {col} (matrix scale {scale:.3e})"
            )
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
        inv_p = 1.0 / work[col, col]
        for j in range(2 * n):
            work[col, j] = work[col, j] * inv_p
        for r in range(n):
            if r == col:
                continue
            f = work[r, col]
            if isinstance(f, float) and f == 0.0:
                continue
            for j in range(2 * n):
                work[r, j] = work[r, j] - f * work[col, j]
    return work[:, n:].copy()


def values(A) -> np.ndarray:
    """Float array of value parts, any tensor shape."""
    A = np.asarray(A)
    out = np.empty(A.shape, dtype=np.float64)
    flat_in = A.reshape(-1)
    flat_out = out.reshape(-1)
    for i in range(flat_in.size):
        flat_out[i] = value_of(flat_in[i])
    return out


def hat(e):
    """Antisymmetric matrix with hat(e) v = e x v (Euclidean cross)."""
    out = np.empty((3, 3), dtype=object)
    out[0, 0] = 0.0
    out[0, 1] = -e[2]
    out[0, 2] = e[1]
    out[1, 0] = e[2]
    out[1, 1] = 0.0
    out[1, 2] = -e[0]
    out[2, 0] = -e[1]
    out[2, 1] = e[0]
    out[2, 2] = 0.0
    return out


def rodrigues(theta, e):
    """Rotation exp(theta * hat(e)) for a unit axis e.

    Works for float or jet angle; e is a numeric unit 3-vector.
    """
    h = hat(e)
    h2 = mat_mul(h, h)
    s = jets.sin(theta)
    c = jets.cos(theta)
    out = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            out[i, j] = (1.0 if i == j else 0.0) + s * h[i, j] + (1.0 - c) * h2[i, j]
    return out


def check_spd_values(G, tol=1e-9):
    """Validate symmetry and positive definiteness of the value part."""
    G0 = values(G)
    n = G0.shape[0]
    scale = max(1.0, np.max(np.abs(G0)))
    if np.max(np.abs(G0 - G0.T)) > tol * scale:
        raise NotSPDError(f"metric not symmetric: defect {np.max(np.abs(G0 - G0.T)):.3e}")
    for k in range(1, n + 1):
        if np.linalg.det(G0[:k, :k]) <= 0.0:
            raise NotSPDError(f"metric not positive definite at minor {k}")


_LEVI3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI3[_i, _j, _k] = 1.0
    _LEVI3[_i, _k, _j] = -1.0


def metric_cross(G, orientation, X, Y):
    """Metric cross product in dimension 3.

    Returns the vector dual (via G) of vol(., X, Y) where vol is the
    Riemannian volume form of G for the given orientation sign.
    """
    check_spd_values(G)
    Ginv = lu_invert(G)
    sqrt_det = jets.sqrt(det(G)) * float(orientation)
    out = np.empty(3, dtype=object)
    for c in range(3):
        s = 0.0
        for d in range(3):
            for a in range(3):
                for b in range(3):
                    w = _LEVI3[d, a, b]
                    if w:
                        s = s + w * Ginv[c, d] * X[a] * Y[b]
        out[c] = s * sqrt_det
    return out


def oriented_gram_schmidt(vectors, G):
    """G-orthonormalize a list of vectors without reordering or flips.

    The output spans the same flags as the input, so it has the same
    orientation.  Raises on (numerical) linear dependence.
    """
    out = []
    for v in vectors:
        w = np.array(v, dtype=object)
        for e in out:
            coef = dot(mat_vec(G, e), w)
            for i in range(len(w)):
                w[i] = w[i] - coef * e[i]
        nrm2 = dot(mat_vec(G, w), w)
        if value_of(nrm2) <= 1e-24:
            raise DependentVectorsError(
                f"vector {len(out)} dependent: squared norm {value_of(nrm2):.3e}"
            )
        nrm = jets.sqrt(nrm2)
        out.append(np.array([wi / nrm for wi in w], dtype=object))
    return out


def euclid_norm(v) -> float:
    return math.sqrt(float(np.dot(np.asarray(v, dtype=float), np.asarray(v, dtype=float))))
