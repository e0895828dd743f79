"""Topological data, lattices, spectra, pairing test and Hodge filtrations.

A lattice is encoded by its basis ``v = s (1 + sum_k z**(-k) C_k)`` over
reference elementary sections ``s_i`` of order ``alpha_i``.  In coordinates
``v_j = s_j + sum_{k,i} (C_k)_{ij} z**(-k) s_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import subspace as sp
from .errors import RankError, ScopeError, ValidationError
from .laurent import (FracExponent, LaurentMatrix, exact_lattice_columns, is_good_basis, lattice_columns,
                      valuation_eliminate, valuation_eliminate_exact)

__all__ = [
    "TopologicalData",
    "Lattice",
    "Filtration",
    "PairingReport",
    "spectral_numbers",
    "check_pairing",
    "gamma_derivatives",
    "gamma_twist",
    "hodge_filtration",
    "twist_matrix",
]


def _mat(x, mu, name):
    m = np.asarray(x, dtype=complex)
    if m.shape != (mu, mu):
        raise ValidationError(f"{name} must be {mu}x{mu}, got {m.shape}")
    return m


@dataclass
class TopologicalData:
    """Discrete input: weight, orders, monodromy log, forms and real structure.

    Attributes
    ----------
    mu : int
        Rank.
    weight : int
        The weight ``w``.
    alpha_ref : list of FracExponent
        Orders of the reference elementary sections.
    N : ndarray
        Nilpotent part of the monodromy logarithm on the flat basis.
    S : ndarray
        Polarizing form.
    kappa : ndarray
        Real structure, ``conj_real(v) = kappa @ conj(v)``.
    Pmat : ndarray
        Constant Gram matrix of ``z**(-w) P`` on the reference sections.
    """

    mu: int
    weight: int
    alpha_ref: list
    N: np.ndarray
    S: np.ndarray
    kappa: np.ndarray
    Pmat: np.ndarray

    def __post_init__(self):
        self.mu = int(self.mu)
        self.weight = int(self.weight)
        self.alpha_ref = [FracExponent.parse(a) for a in self.alpha_ref]
        if len(self.alpha_ref) != self.mu:
            raise ValidationError("alphaRef must have mu entries")
        self.N = _mat(self.N, self.mu, "N")
        self.S = _mat(self.S, self.mu, "S")
        self.kappa = _mat(self.kappa, self.mu, "kappa")
        self.Pmat = _mat(self.Pmat, self.mu, "Pmat")

    # derived data
    @property
    def integral_mask(self) -> np.ndarray:
        """Indices whose monodromy eigenvalue is 1."""
        return np.array([a.is_integer for a in self.alpha_ref])

    def eigen_blocks(self) -> dict:
        """Map from class modulo integers to the list of basis indices."""
        blocks: dict = {}
        for i, a in enumerate(self.alpha_ref):
            blocks.setdefault(a.class_key(), []).append(i)
        return blocks

    def is_semisimple(self, tol: float = 1e-12) -> bool:
        return float(np.abs(self.N).max(initial=0.0)) <= tol

    def violations(self, tol: float = 1e-10) -> list[str]:
        """List the violated structural invariants (empty when consistent)."""
        out = []
        mu = self.mu
        scale = max(1.0, float(np.abs(self.N).max(initial=0.0)))
        if np.abs(np.linalg.matrix_power(self.N / scale, mu)).max() > 1e-8:
            out.append("N is not nilpotent")
        if np.abs(self.kappa @ self.kappa.conj() - np.eye(mu)).max() > tol:
            out.append("kappa is not an involution")
        if any(a.imag != 0.0 for a in self.alpha_ref):
            out.append("monodromy eigenvalue off the unit circle")
        blocks = self.eigen_blocks()
        for key, idx in blocks.items():
            for key2, idx2 in blocks.items():
                if key != key2 and np.abs(self.N[np.ix_(idx, idx2)]).max() > tol:
                    out.append("N mixes monodromy eigenspaces")
        one = np.flatnonzero(self.integral_mask)
        rest = np.flatnonzero(~self.integral_mask)
        w = self.weight
        for idx, sign, label in ((one, (-1) ** w, "eigenvalue-1"), (rest, (-1) ** (w - 1), "other")):
            if idx.size:
                Sb = self.S[np.ix_(idx, idx)]
                if np.abs(Sb - sign * Sb.T).max() > tol * max(1.0, np.abs(Sb).max()):
                    out.append(f"S has the wrong symmetry on the {label} part")
        return out

    def validate(self, tol: float = 1e-10) -> "TopologicalData":
        bad = self.violations(tol)
        if bad:
            raise ValidationError("; ".join(bad))
        return self


@dataclass
class Lattice:
    """A point of the classifying space, given by ``C_1..C_n``.

    ``n`` is ``floor(alpha_max - alpha_min)``; missing trailing matrices are
    filled with zeros.
    """

    topo: TopologicalData
    C: list = field(default_factory=list)

    def __post_init__(self):
        mu = self.topo.mu
        C = [_mat(c, mu, "C_k") for c in self.C]
        n = self.n
        if len(C) > n:
            extra = C[n:]
            if any(np.abs(c).max() > 0 for c in extra):
                raise ValidationError(f"pole order exceeds n = {n}")
            C = C[:n]
        C += [np.zeros((mu, mu), dtype=complex) for _ in range(n - len(C))]
        self.C = C

    @property
    def n(self) -> int:
        re = [a.rational for a in self.topo.alpha_ref]
        return int(math.floor(max(re) - min(re)))

    @property
    def mu(self) -> int:
        return self.topo.mu

    @property
    def alpha(self):
        return self.topo.alpha_ref

    def basis_matrix(self) -> LaurentMatrix:
        """``A(z) = 1 + sum_k z**(-k) C_k``."""
        if not self.C:
            return LaurentMatrix.identity(self.mu)
        return LaurentMatrix.from_lattice(self.C)

    def columns(self) -> list[LaurentMatrix]:
        if not self.C:
            return [LaurentMatrix({0: np.eye(self.mu)[:, j:j + 1]}) for j in range(self.mu)]
        return lattice_columns(self.C)

    def is_good_basis(self) -> bool:
        return is_good_basis(self.C, self.alpha)


@dataclass
class Filtration:
    """Decreasing flag ``F^p`` given by spanning matrices.

    ``steps`` covers ``p`` from ``bottom`` (everything) to ``top`` (the last
    nonzero step); indices outside are clamped.
    """

    steps: dict
    ambient: int

    @property
    def bottom(self) -> int:
        return min(self.steps)

    @property
    def top(self) -> int:
        return max(self.steps)

    def at(self, p: int) -> np.ndarray:
        if not self.steps:
            return np.zeros((self.ambient, 0), dtype=complex)
        if p > self.top:
            return np.zeros((self.ambient, 0), dtype=complex)
        if p < self.bottom:
            return self.steps[self.bottom]
        return self.steps[p]

    def dims(self) -> dict:
        return {p: sp.dim(self.steps[p]) for p in sorted(self.steps)}

    def hodge_numbers(self) -> dict:
        """``dim F^p / F^{p+1}`` for every stored step."""
        return {p: sp.dim(self.at(p)) - sp.dim(self.at(p + 1)) for p in sorted(self.steps)}

    def transform(self, M) -> "Filtration":
        M = np.asarray(M, dtype=complex)
        return Filtration({p: sp.orth(M @ U) for p, U in self.steps.items()}, self.ambient)

    def restrict(self, idx) -> "Filtration":
        """Intersect with the coordinate subspace spanned by ``idx``."""
        E = np.eye(self.ambient, dtype=complex)[:, list(idx)]
        return Filtration({p: sp.intersect(U, E) for p, U in self.steps.items()}, self.ambient)

    def is_decreasing(self) -> bool:
        ps = sorted(self.steps)
        return all(sp.contains(self.steps[a], self.steps[b]) for a, b in zip(ps, ps[1:]))

    @classmethod
    def from_levels(cls, vectors, levels, ambient: int) -> "Filtration":
        """Flag with ``F^p`` spanned by the vectors whose level is ``>= p``."""
        vectors = np.asarray(vectors, dtype=complex)
        levels = list(levels)
        if not levels:
            return cls({}, ambient)
        steps = {}
        for p in range(min(levels), max(levels) + 1):
            sel = [k for k, l in enumerate(levels) if l >= p]
            steps[p] = sp.orth(vectors[:, sel])
        return cls(steps, ambient)


def spectral_numbers(lat: Lattice) -> list:
    """Sorted spectrum of the lattice.

    A good basis is read off directly.  Otherwise real data is eliminated
    exactly over the rationals and complex data in floating point.

    Raises
    ------
    RankError
        If the lattice columns are rank deficient.
    """
    if lat.is_good_basis():
        return sorted(lat.alpha, key=lambda a: a.key)
    if all(np.abs(c.imag).max(initial=0.0) == 0 for c in lat.C):
        A = lat.basis_matrix()
        exact = {e: m.real.tolist() for e, m in A.items()}
        return valuation_eliminate_exact(exact_lattice_columns(exact), lat.alpha)
    return valuation_eliminate(lat.columns(), lat.alpha)


@dataclass
class PairingReport:
    holds: bool
    residueGram: np.ndarray
    max_negative: float
    gram: LaurentMatrix


def check_pairing(lat: Lattice, tol: float = 1e-10) -> PairingReport:
    """Test that ``z**(-w) P`` is holomorphic and nondegenerate on the lattice.

    The Gram matrix is ``A(z)^T Pmat A(-z)``; the test passes if all of its
    negative-degree coefficients vanish and the degree-0 part is invertible.
    """
    A = lat.basis_matrix()
    P = LaurentMatrix.constant(lat.topo.Pmat)
    G = A.transpose() @ P @ A.antipode()
    neg = G.principal_part().max_abs()
    R = G.coeff(0)
    invertible = sp.rank(R, 1e-10) == lat.mu
    return PairingReport(bool(neg <= tol and invertible), R, float(neg), G)


# ---------------------------------------------------------------------------
# gamma twist

def gamma_derivatives(alpha, kmax: int) -> list[complex]:
    """``[Gamma(alpha), Gamma'(alpha), ..., Gamma^(kmax)(alpha)]``.

    Uses ``Gamma' = Gamma psi`` and Leibniz:
    ``Gamma^(k+1) = sum_j binom(k, j) Gamma^(j) psi^(k-j)``.
    """
    a = mpmath.mpc(complex(alpha))
    psi = [mpmath.polygamma(m, a) for m in range(kmax)]
    g = [mpmath.gamma(a)]
    for k in range(kmax):
        g.append(mpmath.fsum(mpmath.binomial(k, j) * g[j] * psi[k - j] for j in range(k + 1)))
    return [complex(x) for x in g]


def gamma_twist(alpha, N) -> np.ndarray:
    """``G = sum_k Gamma^(k)(alpha)/k! (-N/(2 pi i))**k`` for principal ``alpha``.

    Raises
    ------
    ValidationError
        If the real part of ``alpha`` is not in ``(0, 1]`` or ``N`` is not
        nilpotent.
    """
    a = FracExponent.parse(alpha) if not isinstance(alpha, complex) else alpha
    re = float(a.rational) if isinstance(a, FracExponent) else a.real
    if not (0.0 < re <= 1.0):
        raise ValidationError("gamma_twist needs real part of alpha in (0, 1]")
    N = np.asarray(N, dtype=complex)
    m = N.shape[0]
    if m and np.abs(np.linalg.matrix_power(N, m)).max() > 1e-8 * max(1.0, np.abs(N).max()) ** m:
        raise ValidationError("N is not nilpotent")
    g = gamma_derivatives(complex(a), max(m - 1, 0))
    X = -N / (2j * np.pi)
    out = np.zeros((m, m), dtype=complex)
    P = np.eye(m, dtype=complex)
    for k in range(m):
        out += g[k] / math.factorial(k) * P
        P = P @ X
    return out


def twist_matrix(topo: TopologicalData) -> np.ndarray:
    """Block diagonal twist ``G`` over the monodromy eigenspaces."""
    G = np.zeros((topo.mu, topo.mu), dtype=complex)
    for idx in topo.eigen_blocks().values():
        a = topo.alpha_ref[idx[0]].principal()
        G[np.ix_(idx, idx)] = gamma_twist(a, topo.N[np.ix_(idx, idx)])
    return G


def _adapted(lat: Lattice):
    if lat.is_good_basis():
        cols = lat.columns()
        orders = [lat.alpha[j] for j in range(lat.mu)]
        return orders, cols
    _, cols, orders = valuation_eliminate(lat.columns(), lat.alpha, return_basis=True)
    return orders, cols


def hodge_filtration(lat: Lattice, twisted: bool = True) -> Filtration:
    """Hodge filtration on the flat space, twisted by ``G^{-1}``.

    The leading vector of an adapted generator of order ``beta`` lies in
    ``F^p`` exactly for ``p <= floor(w - beta)``.  Non-adapted input is first
    normalised with :func:`valuation_eliminate`.
    """
    from .laurent import _lead_vector

    orders, cols = _adapted(lat)
    w = lat.topo.weight
    vecs, levels = [], []
    for o, c in zip(orders, cols):
        vecs.append(_lead_vector(c, lat.alpha, o))
        levels.append(int(math.floor(w - o.rational)))
    V = np.column_stack(vecs)
    if sp.rank(V) < lat.mu:
        raise RankError("leading vectors are dependent")
    F = Filtration.from_levels(V, levels, lat.mu)
    if twisted:
        F = F.transform(np.linalg.inv(twist_matrix(lat.topo)))
    return F
