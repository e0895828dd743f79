"""Column-span calculus for flags of complex subspaces.

Subspaces are represented by matrices with orthonormal columns.  Ranks are
decided with a relative singular value cutoff.
"""
from __future__ import annotations

import numpy as np

TOL = 1e-9

__all__ = [
    "TOL", "orth", "rank", "span_sum", "intersect", "kernel", "image",
    "contains", "equal", "dim", "extend_basis", "coords",
]


def _cut(s, tol):
    return tol * max(1.0, float(s[0])) if s.size else tol


def orth(M, tol: float = TOL) -> np.ndarray:
    """Orthonormal basis of the column span of ``M``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int((s > _cut(s, tol)).sum())
    return u[:, :r]


def rank(M, tol: float = TOL) -> int:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > _cut(s, tol)).sum())


def dim(U) -> int:
    return np.asarray(U).shape[1]


def span_sum(*mats, n: int | None = None, tol: float = TOL) -> np.ndarray:
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if n is None:
        n = mats[0].shape[0]
    mats = [m for m in mats if m.shape[1] > 0]
    if not mats:
        return np.zeros((n, 0), dtype=complex)
    return orth(np.hstack(mats), tol)


def kernel(M, tol: float = TOL) -> np.ndarray:
    """Orthonormal basis of the null space of ``M``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M)
    r = int((s > _cut(s, tol)).sum()) if s.size else 0
    return vh[r:].conj().T


def image(M, tol: float = TOL) -> np.ndarray:
    return orth(M, tol)


def intersect(A, B, tol: float = TOL) -> np.ndarray:
    """Intersection of two column spans."""
    A = orth(A, tol)
    B = orth(B, tol)
    n = A.shape[0]
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    K = kernel(np.hstack([A, -B]), tol)
    return orth(A @ K[: A.shape[1]], tol)


def contains(A, B, tol: float = TOL) -> bool:
    """True if span(B) is contained in span(A)."""
    B = np.asarray(B)
    if B.shape[1] == 0:
        return True
    return rank(np.hstack([A, B]), tol) == rank(A, tol)


def equal(A, B, tol: float = TOL) -> bool:
    return contains(A, B, tol) and contains(B, A, tol)


def extend_basis(U, W, tol: float = TOL) -> np.ndarray:
    """Columns ``C`` such that ``[U, C]`` is a basis of ``span(U) + span(W)``.

    ``C`` is orthonormal and orthogonal to ``U``.
    """
    U = orth(U, tol)
    W = np.asarray(W, dtype=complex)
    if W.shape[1] == 0:
        return np.zeros((U.shape[0], 0), dtype=complex)
    R = W - U @ (U.conj().T @ W)
    return orth(R, tol)


def coords(B, X) -> np.ndarray:
    """Coordinates of the columns of ``X`` in the basis ``B`` (least squares)."""
    B = np.asarray(B, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if B.shape[1] == 0:
        return np.zeros((0, X.shape[1]), dtype=complex)
    return np.linalg.lstsq(B, X, rcond=None)[0]
