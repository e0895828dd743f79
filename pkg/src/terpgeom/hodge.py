"""Weight filtrations, primitive subspaces and polarized mixed Hodge checks.

The flat space splits as ``H_1 + H_rest`` according to whether the monodromy
eigenvalue equals 1.  Each part carries its own weight: ``w`` on ``H_1`` and
``w - 1`` on the rest.  All graded quotients are realised by orthonormal
complements, so ``Gr_l`` coordinates of ``x in W_l`` are ``C_l^H x``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspace as sp
from .errors import DegenerateError, ValidationError
from .terp import Filtration, TopologicalData

__all__ = [
    "WeightFiltration",
    "PrimitivePart",
    "weight_filtration",
    "is_weight_filtration",
    "check_DcPMHS",
    "check_PMHS_polarized",
    "DcPMHSReport",
    "PolarizationReport",
    "POLARIZATION_SIGN",
]

#: the primitive forms use ``S(a, (-N)**k b)``
POLARIZATION_SIGN = "S(a, (-N)^k b)"


@dataclass
class WeightFiltration:
    """Increasing filtration ``W_l`` stored on the range where it changes."""

    steps: dict
    center: int
    ambient: int

    def at(self, l: int) -> np.ndarray:
        lo, hi = min(self.steps), max(self.steps)
        if l < lo:
            return np.zeros((self.ambient, 0), dtype=complex)
        if l > hi:
            return self.steps[hi]
        return self.steps[l]

    def dims(self) -> dict:
        return {l: sp.dim(U) for l, U in sorted(self.steps.items())}

    def graded_dims(self) -> dict:
        return {l: sp.dim(self.at(l)) - sp.dim(self.at(l - 1)) for l in sorted(self.steps)}

    def weights(self) -> list[int]:
        """Weights with multiplicity (one per graded dimension)."""
        out = []
        for l, d in self.graded_dims().items():
            out += [l] * d
        return out


@dataclass
class PrimitivePart:
    """Primitive subspace ``P_l`` of one eigenvalue block, in ``Gr_l`` coordinates."""

    l: int
    lam: complex
    basis: np.ndarray


def _restrict_op(N, E):
    return E.conj().T @ N @ E


def weight_filtration(N, center: int, basis=None, tol: float = sp.TOL) -> WeightFiltration:
    """Weight filtration of a nilpotent operator centred at ``center``.

    Uses ``W_{c+k} = sum_{j >= max(0,-k)} ker N^{k+j+1} cap im N^j``.

    Parameters
    ----------
    N : ndarray
        Nilpotent matrix.
    center : int
        Central weight.
    basis : ndarray, optional
        Orthonormal basis of an ``N``-invariant subspace; the filtration is
        then built on that subspace.

    Raises
    ------
    ValidationError
        If ``N`` is not nilpotent.
    """
    N = np.asarray(N, dtype=complex)
    mu = N.shape[0]
    E = np.eye(mu, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    m = E.shape[1]
    Ne = _restrict_op(N, E) if m else np.zeros((0, 0), dtype=complex)
    scale = max(1.0, float(np.abs(Ne).max(initial=0.0)))
    if m and np.abs(np.linalg.matrix_power(Ne / scale, m)).max() > 1e-8:
        raise ValidationError("N is not nilpotent")
    if m == 0:
        return WeightFiltration({center: np.zeros((mu, 0), dtype=complex)}, center, mu)
    powers = [np.eye(m, dtype=complex)]
    for _ in range(2 * m + 2):
        powers.append(powers[-1] @ Ne)
    steps = {}
    for k in range(-m, m + 1):
        parts = []
        for j in range(max(0, -k), m + 1):
            ker = sp.kernel(powers[min(k + j + 1, len(powers) - 1)], tol)
            im = sp.image(powers[j], tol)
            parts.append(sp.intersect(ker, im, tol))
        steps[center + k] = sp.orth(E @ sp.span_sum(*parts, n=m), tol)
    return WeightFiltration(steps, center, mu)


def is_weight_filtration(W: WeightFiltration, N, tol: float = sp.TOL) -> bool:
    """Check ``N W_l in W_{l-2}`` and the graded isomorphisms ``N^j``."""
    N = np.asarray(N, dtype=complex)
    for l in W.steps:
        if not sp.contains(W.at(l - 2), N @ W.at(l), tol):
            return False
    c = W.center
    top = max(W.steps) - c + 1
    for j in range(top + 1):
        gp = sp.dim(W.at(c + j)) - sp.dim(W.at(c + j - 1))
        gm = sp.dim(W.at(c - j)) - sp.dim(W.at(c - j - 1))
        if gp != gm:
            return False
        if gp == 0:
            continue
        low = W.at(c - j - 1)
        img = sp.span_sum(np.linalg.matrix_power(N, j) @ W.at(c + j), low, n=N.shape[0])
        if sp.dim(img) - sp.dim(low) != gp:
            return False
    return True


# ---------------------------------------------------------------------------
# graded structure of one part

@dataclass
class _Part:
    name: str
    weight: int
    idx: list
    blocks: dict                 # class key -> list of indices
    W: WeightFiltration
    C: dict = field(default_factory=dict)       # l -> orthonormal complement basis
    label: dict = field(default_factory=dict)   # l -> array of block keys per Gr coordinate

    def gr(self, l):
        return self.C.get(l, np.zeros((self.W.ambient, 0), dtype=complex))


def _parts(data: TopologicalData):
    mu = data.mu
    out = []
    mask = data.integral_mask
    for name, sel, weight in (("H1", mask, data.weight), ("Hrest", ~mask, data.weight - 1)):
        idx = list(np.flatnonzero(sel))
        if not idx:
            continue
        blocks = {k: v for k, v in data.eigen_blocks().items() if v[0] in idx}
        # assemble block-adapted weight filtration
        Ws = {k: weight_filtration(data.N, weight, np.eye(mu, dtype=complex)[:, v])
              for k, v in blocks.items()}
        lo = min(min(w.steps) for w in Ws.values())
        hi = max(max(w.steps) for w in Ws.values())
        steps = {l: np.hstack([w.at(l) for w in Ws.values()]) for l in range(lo, hi + 1)}
        part = _Part(name, weight, idx, blocks, WeightFiltration(steps, weight, mu))
        for l in range(lo, hi + 1):
            cols, labels = [], []
            for k, w in Ws.items():
                c = sp.extend_basis(w.at(l - 1), w.at(l))
                cols.append(c)
                labels += [k] * c.shape[1]
            part.C[l] = np.hstack(cols) if cols else np.zeros((mu, 0), dtype=complex)
            part.label[l] = labels
        out.append(part)
    return out


def _gr_map(part: _Part, N, l: int, k: int) -> np.ndarray:
    """Matrix of ``N**k : Gr_l -> Gr_{l-2k}`` in graded coordinates."""
    Nk = np.linalg.matrix_power(N, k)
    return part.gr(l - 2 * k).conj().T @ Nk @ part.gr(l)


def _F_gr(part: _Part, F: Filtration, p: int, l: int) -> np.ndarray:
    """``F^p Gr_l`` in graded coordinates."""
    X = sp.intersect(F.at(p), part.W.at(l))
    return sp.orth(part.gr(l).conj().T @ X)


def _primitive(part: _Part, N, l: int) -> np.ndarray:
    w = part.weight
    g = part.gr(l).shape[1]
    if l < w or g == 0:
        return np.zeros((g, 0), dtype=complex)
    k = l - w + 1
    if not part.gr(l - 2 * k).shape[1]:
        return np.eye(g, dtype=complex)
    return sp.kernel(_gr_map(part, N, l, k))


def _block_coords(part: _Part, l: int, key) -> np.ndarray:
    lab = part.label[l]
    sel = [i for i, x in enumerate(lab) if x == key]
    return np.eye(len(lab), dtype=complex)[:, sel]


def primitive_parts(data: TopologicalData) -> list[PrimitivePart]:
    """All primitive subspaces ``P_{l, lambda}`` of both parts."""
    out = []
    for part in _parts(data):
        for l in sorted(part.C):
            P = _primitive(part, data.N, l)
            for key in part.blocks:
                B = sp.intersect(P, _block_coords(part, l, key))
                if B.shape[1]:
                    lam = np.exp(-2j * np.pi * complex(float(key[0]), key[1]))
                    out.append(PrimitivePart(l, complex(lam), B))
    return out


@dataclass
class DcPMHSReport:
    dims_match: bool
    N_shift: bool
    primitive_compat: bool
    graded_split: bool
    S_orthogonal: bool
    Ms_invariant: bool
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all((self.dims_match, self.N_shift, self.primitive_compat,
                    self.graded_split, self.S_orthogonal, self.Ms_invariant))


def _p_range(*filts):
    lo = min(f.bottom for f in filts if f.steps) - 1
    hi = max(f.top for f in filts if f.steps) + 2
    return range(lo, hi + 1)


def check_DcPMHS(F: Filtration, data: TopologicalData, F0: Filtration, weight: int | None = None,
                 tol: float = sp.TOL) -> DcPMHSReport:
    """Test the first set of equivalent conditions for membership.

    Conditions are checked separately on the eigenvalue-1 part (weight
    ``w``) and on the remaining part (weight ``w - 1``).

    Parameters
    ----------
    F, F0 : Filtration
        Candidate and reference Hodge filtrations on the flat space.
    data : TopologicalData
        Supplies ``N``, ``S`` and the eigenvalue blocks.
    weight : int, optional
        Overrides ``data.weight``.
    """
    if F.ambient != data.mu or F0.ambient != data.mu:
        raise ValidationError("filtration dimension does not match the data")
    if weight is not None and weight != data.weight:
        data = TopologicalData(data.mu, weight, data.alpha_ref, data.N, data.S, data.kappa, data.Pmat)
    N, S = data.N, data.S
    mu = data.mu
    ps = _p_range(F, F0)
    rep = DcPMHSReport(True, True, True, True, True, True)

    blocks = data.eigen_blocks()
    for p in ps:
        tot = sum(sp.dim(sp.intersect(F.at(p), np.eye(mu)[:, idx])) for idx in blocks.values())
        if tot != sp.dim(F.at(p)):
            rep.Ms_invariant = False
            rep.details.append(f"F^{p} not split by eigenspaces")
        if not sp.contains(F.at(p - 1), N @ F.at(p), tol):
            rep.N_shift = False
            rep.details.append(f"N F^{p} not in F^{p - 1}")

    for part in _parts(data):
        E = np.eye(mu, dtype=complex)[:, part.idx]
        w = part.weight
        for p in ps:
            A = sp.intersect(F.at(p), E)
            B = sp.intersect(F.at(w + 1 - p), E)
            if A.shape[1] and B.shape[1] and np.abs(A.T @ S @ B).max() > 1e-8:
                rep.S_orthogonal = False
                rep.details.append(f"{part.name}: S(F^{p}, F^{w + 1 - p}) != 0")
        ls = sorted(part.C)
        prim = {l: _primitive(part, N, l) for l in ls}
        for l in ls:
            for p in ps:
                FpGr = _F_gr(part, F, p, l)
                F0Gr = _F_gr(part, F0, p, l)
                for key in part.blocks:
                    Bc = _block_coords(part, l, key)
                    d1 = sp.dim(sp.intersect(sp.intersect(FpGr, prim[l]), Bc))
                    d0 = sp.dim(sp.intersect(sp.intersect(F0Gr, prim[l]), Bc))
                    if d1 != d0:
                        rep.dims_match = False
                        rep.details.append(f"{part.name}: dim F^{p}P_{l} block {key}: {d1} vs {d0}")
                # F^p Gr_l = sum_j F^p N^j P_{l+2j}
                pieces = []
                for j in range(0, max(ls) - l + 1):
                    if l + 2 * j not in prim or prim[l + 2 * j].shape[1] == 0:
                        continue
                    NjP = sp.orth(_gr_map(part, N, l + 2 * j, j) @ prim[l + 2 * j])
                    pieces.append(sp.intersect(FpGr, NjP))
                total = sp.span_sum(*pieces, n=FpGr.shape[0]) if pieces else np.zeros((FpGr.shape[0], 0))
                if sum(x.shape[1] for x in pieces) != sp.dim(FpGr) or not sp.equal(total, FpGr):
                    rep.graded_split = False
                    rep.details.append(f"{part.name}: F^{p}Gr_{l} does not split")
                # F^p N^j P_l = N^j F^{p+j} P_l
                if l >= w and prim[l].shape[1]:
                    for j in range(0, l - w + 1):
                        Nj = _gr_map(part, N, l, j)
                        lhs = sp.intersect(_F_gr(part, F, p, l - 2 * j), sp.orth(Nj @ prim[l]))
                        rhs = sp.orth(Nj @ sp.intersect(_F_gr(part, F, p + j, l), prim[l]))
                        if not sp.equal(lhs, rhs):
                            rep.primitive_compat = False
                            rep.details.append(f"{part.name}: F^{p}N^{j}P_{l} mismatch")
    return rep


@dataclass
class PolarizationReport:
    hodge_decomposition: bool
    positive: bool
    sign_convention: str
    min_eigenvalues: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.hodge_decomposition and self.positive


def check_PMHS_polarized(F: Filtration, data: TopologicalData, weight: int | None = None,
                         tol: float = 1e-9) -> PolarizationReport:
    """Hodge decomposition and positivity on every primitive subspace.

    On ``P_l`` (weight ``l``) the pieces are ``H^{p,q} = F^p P_l cap
    conj(F^q P_l)`` with ``p + q = l``; positivity asks that
    ``i**(p-q) S(v, (-N)**(l-w) conj(v))`` be positive definite on each piece.

    Raises
    ------
    DegenerateError
        If an induced form has an eigenvalue inside the zero threshold.
    """
    if weight is not None and weight != data.weight:
        data = TopologicalData(data.mu, weight, data.alpha_ref, data.N, data.S, data.kappa, data.Pmat)
    N, S, K = data.N, data.S, data.kappa
    rep = PolarizationReport(True, True, POLARIZATION_SIGN)
    ps = _p_range(F)
    for part in _parts(data):
        w = part.weight
        for l in sorted(part.C):
            P = _primitive(part, N, l)
            if l < w or P.shape[1] == 0:
                continue
            Cl = part.gr(l)
            # conjugation on Gr_l
            Kgr = Cl.conj().T @ K @ Cl.conj()
            conjP = sp.orth(Kgr @ P.conj())
            if not sp.equal(conjP, P):
                rep.hodge_decomposition = False
                rep.details.append(f"{part.name}: P_{l} not defined over R")
                continue
            FP = {p: sp.intersect(_F_gr(part, F, p, l), P) for p in ps}
            pieces = {}
            for p in ps:
                q = l - p
                if q < min(FP):
                    conjFq = P
                elif q > max(FP):
                    conjFq = np.zeros((P.shape[0], 0), dtype=complex)
                else:
                    conjFq = sp.orth(Kgr @ FP[q].conj())
                piece = sp.intersect(FP[p], conjFq)
                if piece.shape[1]:
                    pieces[p] = piece
            total = sum(x.shape[1] for x in pieces.values())
            if total != P.shape[1]:
                rep.hodge_decomposition = False
                rep.details.append(f"{part.name}: no Hodge decomposition on P_{l}")
                continue
            k = l - w
            form = S @ np.linalg.matrix_power(-N, k)
            for p, U in pieces.items():
                q = l - p
                L = Cl @ U
                Lbar = K @ L.conj()
                M = (1j) ** ((p - q) % 4) * (L.T @ form @ Lbar)
                herm = np.abs(M - M.conj().T).max() <= 1e-8 * max(1.0, np.abs(M).max())
                ev = np.linalg.eigvalsh((M + M.conj().T) / 2)
                if np.abs(ev).min() < tol:
                    raise DegenerateError(f"{part.name}: degenerate form on H^{p},{q} of P_{l}")
                rep.min_eigenvalues[f"{part.name}:P{l}:H{p},{q}"] = float(ev.min())
                if not herm or ev.min() <= 0:
                    rep.positive = False
                    rep.details.append(f"{part.name}: H^{p},{q} of P_{l} not positive")
    return rep
