"""The involution tau, global sections of the glued bundle and the metric h.

Only semisimple monodromy (``N = 0``) is supported.  On reference sections
``tau(z**alpha A) = z**(w - conj(alpha)) kappa(A)``; tau is antilinear in the
sense ``tau(f(z) s) = conj(f)(1/z) tau(s)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspace as sp
from .errors import ConsistencyError, DegenerateError, ScopeError, ValidationError
from .laurent import FracExponent, LaurentMatrix, linv_unit
from .terp import Lattice, TopologicalData

__all__ = [
    "tau_reference",
    "tau_matrix",
    "tau_apply",
    "tau_squared",
    "GlobalSections",
    "global_sections",
    "TwistorReport",
    "metric_gram",
    "tangent_metric",
    "kodaira_spencer",
    "ZERO_THRESHOLD",
    "CALIBRATION_SIGN",
]

ZERO_THRESHOLD = 1e-8
#: global sign applied to h; +1 makes the elementary self-dual point positive
CALIBRATION_SIGN = 1


def tau_reference(topo: TopologicalData) -> LaurentMatrix:
    """``T0`` with ``tau(s) = s T0`` on the reference sections.

    Raises
    ------
    ScopeError
        If ``N != 0``.
    ValidationError
        If kappa links sections whose orders do not pair to an integer.
    """
    if not topo.is_semisimple():
        raise ScopeError("tau is implemented for semisimple monodromy only (N = 0)")
    mu, w, K = topo.mu, topo.weight, topo.kappa
    coeffs: dict[int, np.ndarray] = {}
    for i in range(mu):
        ai = topo.alpha_ref[i]
        abar = FracExponent(ai.rational, -ai.imag)
        for j in range(mu):
            if K[j, i] == 0:
                continue
            e = FracExponent(w) - abar - topo.alpha_ref[j]
            if not e.is_integer:
                raise ValidationError(f"kappa pairs s_{i + 1} with s_{j + 1} at non-integral shift {e}")
            m = coeffs.setdefault(int(e.rational), np.zeros((mu, mu), dtype=complex))
            m[j, i] += K[j, i]
    return LaurentMatrix(coeffs, (mu, mu))


def _basis_inverse(lat: Lattice) -> LaurentMatrix:
    A = lat.basis_matrix()
    window = max(1, lat.n) * lat.mu + 1
    Ainv = linv_unit(A, window)
    if not (A @ Ainv).allclose(LaurentMatrix.identity(lat.mu), 1e-10):
        raise ValidationError("lattice basis has no Laurent polynomial inverse; use a good basis")
    return Ainv


def _tau_s(lat: Lattice) -> LaurentMatrix:
    """s-coordinates of ``tau(v)``: ``T0(z) conj(A)(1/z)``."""
    A = lat.basis_matrix()
    return tau_reference(lat.topo) @ A.conj_coeffs().reflect()


def tau_matrix(lat: Lattice) -> LaurentMatrix:
    """Matrix ``T`` with ``tau(v) = v T`` (coefficients enter conjugated).

    ``T = A(z)^{-1} T0(z) conj(A)(1/z)``.
    """
    return _basis_inverse(lat) @ _tau_s(lat)


def tau_apply(T: LaurentMatrix, p: LaurentMatrix) -> LaurentMatrix:
    """Coordinates of ``tau(v p)`` in the basis ``v``: ``T conj(p)(1/z)``."""
    return T @ p.conj_coeffs().reflect()


def tau_squared(lat: Lattice) -> LaurentMatrix:
    """``T conj(T)(1/z)``; equals the identity when tau is an involution."""
    T = tau_matrix(lat)
    return T @ T.conj_coeffs().reflect()


@dataclass
class GlobalSections:
    """Solution space of the section equations.

    ``P[d]`` (``mu x h0``) are the coefficients of ``z**d`` of the sections
    in the basis ``v``; ``Q[d]`` the coefficients of ``z**(-d)`` in the basis
    ``tau(v)``.
    """

    dim: int
    D: int
    P: list
    Q: list
    singular_values: np.ndarray
    evaluation_scaled: np.ndarray | None = None

    @property
    def evaluation(self) -> np.ndarray:
        return self.P[0]


def global_sections(lat: Lattice, tol: float = 1e-9) -> GlobalSections:
    """Sections holomorphic at 0 in ``v`` and at infinity in ``tau(v)``.

    Solves ``A(z) p(z) = T0(z) conj(A)(1/z) q(1/z)`` for polynomials ``p``,
    ``q`` of degree at most ``D = n + (pole order of tau_matrix)``.  The
    system is equilibrated before the rank decision; ``singular_values`` are
    those of the scaled system.
    """
    mu = lat.mu
    A = lat.basis_matrix()
    Ts = _tau_s(lat)
    T = tau_matrix(lat)
    pole = max(0, -(T.min_exponent() or 0))
    D = lat.n + pole
    nv = 2 * (D + 1) * mu
    rows: dict[int, np.ndarray] = {}
    for d in range(D + 1):
        for e, M in A.items():
            R = rows.setdefault(e + d, np.zeros((mu, nv), dtype=complex))
            R[:, d * mu:(d + 1) * mu] += M
        for e, M in Ts.items():
            R = rows.setdefault(e - d, np.zeros((mu, nv), dtype=complex))
            off = (D + 1) * mu + d * mu
            R[:, off:off + mu] -= M
    Mx = np.vstack([rows[e] for e in sorted(rows)])
    # alternate row and column scaling; large parameters otherwise spread the
    # singular values over many decades and the rank cut misfires
    col = np.ones(nv)
    for _ in range(5):
        rn = np.linalg.norm(Mx, axis=1, keepdims=True)
        Mx = Mx / np.where(rn > 0, rn, 1.0)
        cn = np.linalg.norm(Mx, axis=0)
        cn = np.where(cn > 0, cn, 1.0)
        Mx = Mx / cn
        col = col / cn
    _, s, vh = np.linalg.svd(Mx)
    cut = tol * max(1.0, s[0])
    r = int((s > cut).sum())
    ns_scaled = vh[r:].conj().T
    ns = col[:, None] * ns_scaled
    h0 = ns.shape[1]
    P = [ns[d * mu:(d + 1) * mu] for d in range(D + 1)]
    Q = [ns[(D + 1 + d) * mu:(D + 2 + d) * mu] for d in range(D + 1)]
    return GlobalSections(h0, D, P, Q, s, ns_scaled[:mu])


@dataclass
class TwistorReport:
    """Purity and polarization data of one lattice."""

    globalSectionDim: int
    pure: bool
    gram: np.ndarray | None = None
    signature: tuple | None = None
    D: int = 0
    evaluation_cond: float = float("inf")
    z_residual: float = 0.0
    calibration: int = CALIBRATION_SIGN
    sections: GlobalSections | None = field(default=None, repr=False)

    @property
    def polarized(self) -> bool:
        return self.signature is not None and self.signature[1] == 0


def _section_polys(gs: GlobalSections, E_inv) -> list:
    return [Pd @ E_inv for Pd in gs.P]


def metric_gram(lat: Lattice, strict: bool = True, zero_threshold: float = ZERO_THRESHOLD) -> TwistorReport:
    """Gram matrix of ``h(a, b) = z**(-w) P(a, tau b)`` on global sections.

    The section basis is normalised so that it equals ``v`` at ``z = 0``.

    Parameters
    ----------
    strict : bool
        When true, non-pure input and degenerate grams raise; otherwise they
        are reported in the returned record.
    zero_threshold : float
        Eigenvalues of the diagonally equilibrated gram below this are
        treated as zero.

    Raises
    ------
    ValidationError
        Non-pure lattice (strict mode).
    DegenerateError
        Gram eigenvalue within ``ZERO_THRESHOLD`` of zero (strict mode).
    """
    mu = lat.mu
    gs = global_sections(lat)
    rep = TwistorReport(gs.dim, False, D=gs.D, sections=gs)
    if gs.dim != mu:
        if strict:
            raise ValidationError(f"lattice is not pure: h0 = {gs.dim}")
        return rep
    E = gs.evaluation
    # rank of the evaluation is decided in the equilibrated coordinates
    sv = np.linalg.svd(gs.evaluation_scaled if gs.evaluation_scaled is not None else E,
                       compute_uv=False)
    rep.evaluation_cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if sv[-1] <= ZERO_THRESHOLD * sv[0]:
        if strict:
            raise ValidationError("lattice is not pure: sections are dependent at z = 0")
        return rep
    rep.pure = True
    # gram in the raw null-space basis first; its signature does not depend
    # on the basis and it avoids squaring the conditioning of the evaluation
    A = lat.basis_matrix()
    Pz = LaurentMatrix({d: m for d, m in enumerate(gs.P)}, (mu, gs.dim))
    Ap = A @ Pz
    Tq = _tau_s(lat) @ Pz.conj_coeffs().reflect()
    H = Ap.transpose() @ LaurentMatrix.constant(lat.topo.Pmat) @ Tq.antipode()
    G0 = CALIBRATION_SIGN * H.coeff(0)
    # symmetric diagonal congruence: keeps the signature, removes the spread
    # of scales that the basis picks up for large parameters
    row = np.abs(G0).max(axis=1)
    d = 1.0 / np.sqrt(np.where(row > 0, row, 1.0))
    Dm = np.outer(d, d)
    rest = max((np.abs(M * Dm).max() for e, M in H.items() if e != 0), default=0.0)
    rep.z_residual = float(rest / max(1.0, np.abs(G0 * Dm).max()))
    if rep.z_residual > 1e-9:
        raise ConsistencyError(f"h is not constant in z (residual {rep.z_residual:.3g})")
    herm = np.abs((G0 - G0.conj().T) * Dm).max()
    if herm > 1e-10:
        raise ConsistencyError(f"gram is not hermitian (defect {herm:.3g})")
    G0 = (G0 + G0.conj().T) / 2
    Einv = np.linalg.inv(E)
    G = Einv.T @ G0 @ Einv.conj()
    rep.gram = (G + G.conj().T) / 2
    ev = np.linalg.eigvalsh(G0 * Dm)
    if np.abs(ev).min() <= zero_threshold:
        if strict:
            raise DegenerateError("gram has an eigenvalue inside the zero threshold")
        return rep
    rep.signature = (int((ev > 0).sum()), int((ev < 0).sum()))
    return rep


def kodaira_spencer(lat: Lattice, dC) -> list[np.ndarray]:
    """``Delta_k`` with ``A^{-1} dA = sum_k Delta_k z**(-k)``.

    ``dC`` lists the derivatives of ``C_1..C_n`` along a tangent vector.
    """
    mu = lat.mu
    dA = LaurentMatrix({-k: np.asarray(c, dtype=complex) for k, c in enumerate(dC, 1)}, (mu, mu))
    X = _basis_inverse(lat) @ dA
    if X.max_exponent() is not None and X.max_exponent() >= 0:
        raise ConsistencyError("Kodaira-Spencer class has a holomorphic part")
    kmax = -X.min_exponent() if X.min_exponent() is not None else 0
    return [X.coeff(-k) for k in range(1, max(kmax, lat.n) + 1)]


def tangent_metric(lat: Lattice, Delta, report: TwistorReport | None = None) -> float:
    """``h(xi, xi) = sum_k Tr(D_k D_k^H)`` for a tangent vector.

    ``Delta`` holds ``Delta_1..Delta_n`` with ``v -> v sum_k Delta_k z**(-k)``
    in the lattice basis.  The class is moved to the frame of global sections,
    its principal part is kept, and the result is expressed in an
    ``h``-orthonormal frame before taking the trace norm.

    Raises
    ------
    ValidationError
        If the lattice is not pure and polarized.
    """
    mu = lat.mu
    rep = report if report is not None else metric_gram(lat)
    if not rep.polarized:
        raise ValidationError("tangent metric needs a pure polarized lattice")
    gs = rep.sections
    Einv = np.linalg.inv(gs.evaluation)
    P = _section_polys(gs, Einv)
    Delta = [np.asarray(d, dtype=complex) for d in Delta]
    if not Delta or all(np.abs(d).max() == 0 for d in Delta):
        return 0.0
    n = len(Delta)
    Pz = LaurentMatrix({d: m for d, m in enumerate(P)}, (mu, mu))
    Pinv = linv_unit(Pz.truncate(hi=n), n).truncate(lo=0, hi=n)
    Dz = LaurentMatrix({-k: d for k, d in enumerate(Delta, 1)}, (mu, mu))
    Gam = (Pinv @ Dz @ Pz.truncate(hi=n)).principal_part()
    G = rep.gram
    ev, V = np.linalg.eigh(G)
    L = (V @ np.diag(ev ** -0.5) @ V.conj().T).conj()
    Linv = np.linalg.inv(L)
    total = 0.0
    for e, M in Gam.items():
        Mp = Linv @ M @ L
        total += float(np.trace(Mp @ Mp.conj().T).real)
    return total
