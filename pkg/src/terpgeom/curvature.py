"""Tangent-space conditions, horizontal rank and the curvature computations.

Kronecker conventions: ``np.kron(X, Y) @ vec(A) == vec(Y @ A @ X.T)`` with
column-major ``vec``.  The tensor order is (z-block) x (dual) x (vector);
the ``z**-1`` block is the first one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspace as sp
from .errors import ConsistencyError, ValidationError
from .jets import Jet2, jet_adjoint, jet_kron, jet_mul, jet_poly_inv, jet_transpose
from .laurent import FracExponent

__all__ = [
    "KSVector",
    "g2_check",
    "g3_check",
    "g3_pattern",
    "g4_check",
    "horizontal_rank",
    "shift_matrix",
    "build_H_jet",
    "build_H_jet_product",
    "curvature_matrix_closed",
    "curvature_matrix_jet",
    "curvature_matrix",
    "curvature_contraction",
    "tensor_contraction",
    "vec",
    "phi_value",
    "is_symmetric_nilpotent",
]

TOL = 1e-10


@dataclass
class KSVector:
    """Coefficients ``Delta_1..Delta_n`` of a Kodaira-Spencer class."""

    Delta: list = field(default_factory=list)

    def __post_init__(self):
        self.Delta = [np.asarray(d, dtype=complex) for d in self.Delta]

    @property
    def n(self) -> int:
        return len(self.Delta)


def _as_ks(ks) -> KSVector:
    return ks if isinstance(ks, KSVector) else KSVector(list(ks))


def g2_check(ks, Pmat, tol: float = TOL) -> bool:
    """``Delta_k^T Pmat + (-1)^k Pmat Delta_k = 0`` for every ``k``."""
    ks = _as_ks(ks)
    Pmat = np.asarray(Pmat, dtype=complex)
    return all(np.abs(D.T @ Pmat + (-1) ** k * Pmat @ D).max(initial=0.0) <= tol
               for k, D in enumerate(ks.Delta, 1))


def g3_pattern(alpha, k: int) -> np.ndarray:
    """Boolean mask of entries allowed to be nonzero: ``alpha_i - k >= alpha_j``."""
    a = [FracExponent.parse(x) for x in alpha]
    mu = len(a)
    return np.array([[not ((a[i] - k).key < a[j].key) for j in range(mu)] for i in range(mu)])


def g3_check(ks, alpha, tol: float = TOL) -> bool:
    """Zero pattern ``(Delta_k)_{ij} = 0`` whenever ``alpha_i - k < alpha_j``."""
    ks = _as_ks(ks)
    for k, D in enumerate(ks.Delta, 1):
        if np.abs(D[~g3_pattern(alpha, k)]).max(initial=0.0) > tol:
            return False
    return True


def g4_check(ks, B, tol: float = TOL) -> bool:
    """Bracket conditions on the coefficients of ``z**(-l)``, ``l = 1..n-1``.

    ``(-1 - l) Delta_{l+1} + sum_{k=l}^{n} [B_{k-1-l}, Delta_k] = 0``, where
    ``B`` lists ``B_{-1}, B_0, ..., B_{n-2}``.

    Raises
    ------
    ValidationError
        If fewer than ``n`` coefficients of ``B`` are supplied (``n >= 2``).
    """
    ks = _as_ks(ks)
    n = ks.n
    if n <= 1:
        return True
    B = [np.asarray(b, dtype=complex) for b in B]
    if len(B) < n:
        raise ValidationError(f"need B_-1..B_{n - 2} ({n} matrices), got {len(B)}")
    Bc = lambda m: B[m + 1]
    D = lambda k: ks.Delta[k - 1]
    for l in range(1, n):
        acc = (-1 - l) * D(l + 1)
        for k in range(l, n + 1):
            b = Bc(k - 1 - l)
            acc = acc + b @ D(k) - D(k) @ b
        if np.abs(acc).max() > tol:
            return False
    return True


def horizontal_rank(U, Pmat, alpha, tol: float = 1e-9) -> int:
    """Dimension of ``{Delta_1 : g2, g3 (k = 1) and [U, Delta_1] = 0}``."""
    U = np.asarray(U, dtype=complex)
    Pmat = np.asarray(Pmat, dtype=complex)
    mu = U.shape[0]
    I = np.eye(mu)
    rows = []
    # vec is column-major: vec(X Y Z) = (Z^T kron X) vec(Y)
    T = np.zeros((mu * mu, mu * mu))
    for i in range(mu):
        for j in range(mu):
            T[i * mu + j, j * mu + i] = 1  # vec(D^T) = T vec(D)
    rows.append(np.kron(Pmat.T, I) @ T - np.kron(I, Pmat))   # D^T P - P D
    mask = ~g3_pattern(alpha, 1)
    sel = np.flatnonzero(mask.flatten(order="F"))
    rows.append(np.eye(mu * mu)[sel])
    rows.append(np.kron(I, U) - np.kron(U.T, I))              # U D - D U
    M = np.vstack(rows)
    return int(sp.kernel(M, tol).shape[1])


# ---------------------------------------------------------------------------
# curvature

def vec(A) -> np.ndarray:
    return np.asarray(A).flatten(order="F")


def shift_matrix(n: int) -> np.ndarray:
    """``N_z``: ones on the superdiagonal."""
    return np.eye(n, k=1)


def build_H_jet(Delta1, n: int) -> Jet2:
    """Closed-form jet of ``H`` along ``C_1 = t Delta_1``.

    ``H = 1 + t N_z^T (x) (D(x)1 - 1(x)D) + tbar N_z (x) (Db(x)1 - 1(x)Db)
    + t tbar [ -1_n (x) (1(x)[Db,D] + [Db,D](x)1)
               + 1_{n-1} (x) (D Db(x)1 + 1(x)D Db - Db(x)D - D(x)Db) ]``
    with ``1_{n-1} = N_z^T N_z``.
    """
    D = np.asarray(Delta1, dtype=complex)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError("Delta_1 must be square")
    if n < 1:
        raise ValidationError("n must be positive")
    mu = D.shape[0]
    Db = D.conj()
    I = np.eye(mu)
    Nz = shift_matrix(n)
    In = np.eye(n)
    Inm1 = Nz.T @ Nz
    com = Db @ D - D @ Db
    c00 = np.eye(n * mu * mu, dtype=complex)
    c10 = np.kron(Nz.T, np.kron(D, I) - np.kron(I, D))
    c01 = np.kron(Nz, np.kron(Db, I) - np.kron(I, Db))
    c11 = (-np.kron(In, np.kron(I, com) + np.kron(com, I))
           + np.kron(Inm1, np.kron(D @ Db, I) + np.kron(I, D @ Db) - np.kron(Db, D) - np.kron(D, Db)))
    return Jet2(c00, c10, c01, c11)


def build_H_jet_product(Delta1, n: int) -> Jet2:
    """``H = conj(X)^T X`` computed from the base change, not the closed form.

    With ``C = t Delta_1`` the base change ``B = 1 - [Cb, C]/2 - z Cb`` is
    inverted in the jet ring, ``X = sum_k N_z^k (x) (coefficient of z^k in
    (B^{-1})^T (x) B)``, and ``H`` is the jet adjoint of ``X`` times ``X``.
    """
    D = np.asarray(Delta1, dtype=complex)
    mu = D.shape[0]
    C = Jet2.linear(D)
    Z = np.zeros_like(D)
    Cb = Jet2(Z, Z, D.conj(), Z)
    comm = jet_mul(Cb, C) - jet_mul(C, Cb)
    B = [Jet2.identity(mu) - 0.5 * comm, -Cb]
    Binv = jet_poly_inv(B, n)
    BinvT = [jet_transpose(b) for b in Binv]
    Nz = shift_matrix(n)
    X = None
    for k in range(n):
        coef = None
        for a in range(k + 1):
            b = k - a
            if b < len(B):
                term = jet_kron(BinvT[a], B[b])
                coef = term if coef is None else coef + term
        block = jet_kron(Jet2.constant(np.linalg.matrix_power(Nz, k)), coef)
        X = block if X is None else X + block
    return jet_mul(jet_adjoint(X), X)


def curvature_matrix_closed(Delta1, n: int) -> np.ndarray:
    """``1_n (x) S - 1_{n-1} (x) (...) + 1'_{n-1} (x) R``.

    Valid for symmetric ``Delta_1``; the base-change route differs otherwise.
    """
    D = np.asarray(Delta1, dtype=complex)
    mu = D.shape[0]
    Db = D.conj()
    I = np.eye(mu)
    Nz = shift_matrix(n)
    com = Db @ D - D @ Db
    S = np.kron(I, com) + np.kron(com, I)
    mid = np.kron(D @ Db, I) + np.kron(I, D @ Db) - np.kron(Db, D) - np.kron(D, Db)
    R = np.kron(Db @ D, I) + np.kron(I, Db @ D) - np.kron(Db, D) - np.kron(D, Db)
    return np.kron(np.eye(n), S) - np.kron(Nz.T @ Nz, mid) + np.kron(Nz @ Nz.T, R)


def curvature_matrix_jet(H: Jet2) -> np.ndarray:
    """``xibar(H) xi(H) - (dbar d H)`` at a point where ``H = 1``."""
    if not np.allclose(H.c00, np.eye(H.shape[0]), atol=1e-12):
        raise ValidationError("the formula needs H = identity at the base point")
    return H.c01 @ H.c10 - H.c11


def curvature_matrix(Delta1, n: int, tol: float = 1e-9) -> np.ndarray:
    """Curvature matrix, evaluated two ways and cross-checked.

    Raises
    ------
    ConsistencyError
        If the closed form and the jet evaluation differ by more than ``tol``.
    """
    closed = curvature_matrix_closed(Delta1, n)
    jet = curvature_matrix_jet(build_H_jet_product(Delta1, n))
    err = float(np.abs(closed - jet).max(initial=0.0))
    if err > tol:
        raise ConsistencyError(f"closed form and jet evaluation differ by {err:.3g}")
    return closed


def tensor_contraction(Delta1, n: int = 2) -> float:
    """``(M v)^T conj(v)`` for ``v = e_1 (x) vec(Delta_1)``."""
    D = np.asarray(Delta1, dtype=complex)
    M = curvature_matrix_closed(D, n)
    e1 = np.zeros(n)
    e1[0] = 1
    v = np.kron(e1, vec(D))
    return complex((M @ v) @ v.conj()).real


def curvature_contraction(Delta1, cross_check: bool = True, tol: float = 1e-9) -> float:
    """``-||[Delta_1, conj Delta_1]||_F^2``.

    For symmetric input the value is also obtained by contracting the
    curvature matrix against ``vec(Delta_1)`` and the two are compared.
    """
    D = np.asarray(Delta1, dtype=complex)
    c = D @ D.conj() - D.conj() @ D
    val = -float(np.sum(np.abs(c) ** 2))
    if cross_check and np.abs(D - D.T).max(initial=0.0) <= TOL * max(1.0, np.abs(D).max()):
        other = tensor_contraction(D)
        if abs(other - val) > tol * max(1.0, abs(val)):
            raise ConsistencyError(f"contraction routes disagree: {val} vs {other}")
    return val


def is_symmetric_nilpotent(A, tol_sym: float = 1e-10, tol_nil: float = 1e-8) -> bool:
    A = np.asarray(A, dtype=complex)
    nrm = np.linalg.norm(A)
    if nrm == 0:
        return False
    An = A / nrm
    return (np.abs(An - An.T).max() <= tol_sym
            and np.linalg.norm(np.linalg.matrix_power(An, A.shape[0])) < tol_nil)


def phi_value(A) -> float:
    """``-||[A, conj A]||^2 / ||A||^4`` on symmetric nilpotent ``A != 0``.

    Raises
    ------
    ValidationError
        For zero, non-symmetric or non-nilpotent input.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("phi_value needs a square matrix")
    nrm = np.linalg.norm(A)
    if nrm == 0:
        raise ValidationError("phi_value is undefined at 0")
    An = A / nrm
    if np.abs(An - An.T).max() > 1e-10:
        raise ValidationError("matrix is not symmetric")
    if np.linalg.norm(np.linalg.matrix_power(An, A.shape[0])) >= 1e-8:
        raise ValidationError("matrix is not nilpotent")
    c = An @ An.conj() - An.conj() @ An
    return -float(np.sum(np.abs(c) ** 2))
