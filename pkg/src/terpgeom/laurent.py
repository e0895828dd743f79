"""Finite Laurent polynomials in ``z`` with complex matrix coefficients.

The module also provides :class:`FracExponent`, the exact order of an
elementary section, and :func:`valuation_eliminate`, which turns an arbitrary
generating set of a lattice into one adapted to the order filtration.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import RankError, ValidationError

__all__ = [
    "FracExponent",
    "LaurentMatrix",
    "lmul",
    "linv_unit",
    "valuation_eliminate",
    "valuation_eliminate_exact",
    "exact_lattice_columns",
    "exact_matmul",
    "lattice_columns",
    "is_good_basis",
]

_EXP_RE = re.compile(
    r"^\s*(?P<re>[+-]?\s*[0-9]+(?:\.[0-9]*)?(?:/[0-9]+)?)?"
    r"\s*(?:(?P<sign>[+-])\s*(?P<im>[0-9]*\.?[0-9]*(?:[eE][+-]?[0-9]+)?)\s*[ij])?\s*$"
)


@dataclass(frozen=True)
class FracExponent:
    """Exact rational order with an optional imaginary part.

    Parameters
    ----------
    rational : Fraction
        Real part, stored in lowest terms.
    imag : float
        Imaginary part. It never takes part in integrality tests of the real
        part; ties in the real part are broken by it when sorting.
    """

    rational: Fraction
    imag: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "imag", float(self.imag) + 0.0)

    @classmethod
    def parse(cls, text) -> "FracExponent":
        """Parse ``"-5/4"``, ``"1/2+0.3i"``, ints, floats or Fractions."""
        if isinstance(text, FracExponent):
            return text
        if isinstance(text, (int, Fraction)):
            return cls(Fraction(text))
        if isinstance(text, float):
            return cls(Fraction(text).limit_denominator(10**9))
        m = _EXP_RE.match(str(text))
        if m is None or (m.group("re") is None and m.group("sign") is None):
            raise ValidationError(f"cannot parse exponent {text!r}")
        re_part = Fraction(m.group("re").replace(" ", "")) if m.group("re") else Fraction(0)
        im = 0.0
        if m.group("sign"):
            mag = m.group("im") or "1"
            im = float(mag) * (-1.0 if m.group("sign") == "-" else 1.0)
        return cls(re_part, im)

    @property
    def key(self):
        """Sort key: real part first, then imaginary part."""
        return (self.rational, self.imag)

    def __lt__(self, other):
        return self.key < FracExponent.parse(other).key

    def __le__(self, other):
        return self.key <= FracExponent.parse(other).key

    def __gt__(self, other):
        return self.key > FracExponent.parse(other).key

    def __ge__(self, other):
        return self.key >= FracExponent.parse(other).key

    def __add__(self, other):
        if isinstance(other, FracExponent):
            return FracExponent(self.rational + other.rational, self.imag + other.imag)
        return FracExponent(self.rational + Fraction(other), self.imag)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, FracExponent):
            return FracExponent(self.rational - other.rational, self.imag - other.imag)
        return FracExponent(self.rational - Fraction(other), self.imag)

    def __rsub__(self, other):
        return FracExponent(Fraction(other) - self.rational, -self.imag)

    def __neg__(self):
        return FracExponent(-self.rational, -self.imag)

    @property
    def is_integer(self) -> bool:
        return self.imag == 0.0 and self.rational.denominator == 1

    def class_key(self):
        """Key of the class modulo integers (same monodromy eigenvalue)."""
        return (self.rational - math.floor(self.rational), self.imag)

    def principal(self) -> "FracExponent":
        """Representative with real part in ``(0, 1]``."""
        shift = math.ceil(self.rational) - 1
        return FracExponent(self.rational - shift, self.imag)

    def floor(self) -> int:
        return math.floor(self.rational)

    def __complex__(self):
        return complex(float(self.rational), self.imag)

    def __float__(self):
        return float(self.rational)

    def __str__(self):
        r = str(self.rational)
        if self.imag == 0.0:
            return r
        return f"{r}{'+' if self.imag > 0 else '-'}{abs(self.imag):.12g}i"

    def __repr__(self):
        return f"FracExponent({self})"


class LaurentMatrix:
    """Matrix-valued Laurent polynomial ``sum_e coeff[e] z**e``.

    Coefficients that are exactly zero are dropped, so ``support`` lists the
    exponents that actually carry data.

    Parameters
    ----------
    coeffs : mapping
        Integer exponent to 2-d array.
    shape : tuple, optional
        Required when ``coeffs`` is empty.
    """

    __slots__ = ("_c", "shape")

    def __init__(self, coeffs: Mapping[int, np.ndarray] | None = None, shape=None):
        coeffs = dict(coeffs or {})
        data = {}
        for e, m in coeffs.items():
            m = np.array(m, dtype=complex)
            if m.ndim != 2:
                raise ValidationError("Laurent coefficients must be 2-d arrays")
            if shape is None:
                shape = m.shape
            elif m.shape != tuple(shape):
                raise ValidationError(f"shape mismatch: {m.shape} vs {tuple(shape)}")
            if np.any(m != 0):
                m.setflags(write=False)
                data[int(e)] = m
        if shape is None:
            raise ValidationError("shape required for an empty Laurent matrix")
        self._c = dict(sorted(data.items()))
        self.shape = tuple(shape)

    # construction helpers
    @classmethod
    def identity(cls, mu: int) -> "LaurentMatrix":
        return cls({0: np.eye(mu)})

    @classmethod
    def zeros(cls, shape) -> "LaurentMatrix":
        return cls({}, shape)

    @classmethod
    def constant(cls, m) -> "LaurentMatrix":
        m = np.asarray(m, dtype=complex)
        return cls({0: m}, m.shape)

    @classmethod
    def from_lattice(cls, C: Sequence[np.ndarray]) -> "LaurentMatrix":
        """``1 + sum_k z**(-k) C_k``."""
        C = [np.asarray(c, dtype=complex) for c in C]
        if not C:
            raise ValidationError("need at least one matrix to fix the size")
        d = {0: np.eye(C[0].shape[0])}
        for k, c in enumerate(C, 1):
            d[-k] = c
        return cls(d)

    # accessors
    @property
    def support(self) -> list[int]:
        return list(self._c)

    def coeff(self, e: int) -> np.ndarray:
        m = self._c.get(int(e))
        return np.zeros(self.shape, dtype=complex) if m is None else m

    def items(self):
        return self._c.items()

    def __len__(self):
        return len(self._c)

    def __iter__(self):
        return iter(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def min_exponent(self):
        return min(self._c) if self._c else None

    def max_exponent(self):
        return max(self._c) if self._c else None

    # algebra
    def __add__(self, other):
        other = _as_laurent(other, self.shape)
        d = dict(self._c)
        for e, m in other.items():
            d[e] = d[e] + m if e in d else m
        return LaurentMatrix(d, self.shape)

    __radd__ = __add__

    def __neg__(self):
        return LaurentMatrix({e: -m for e, m in self._c.items()}, self.shape)

    def __sub__(self, other):
        return self + (-_as_laurent(other, self.shape))

    def __rsub__(self, other):
        return _as_laurent(other, self.shape) - self

    def __mul__(self, scalar):
        return LaurentMatrix({e: scalar * m for e, m in self._c.items()}, self.shape)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return lmul(self, other)

    def transpose(self) -> "LaurentMatrix":
        return LaurentMatrix({e: m.T for e, m in self._c.items()}, self.shape[::-1])

    @property
    def T(self):
        return self.transpose()

    def conj_coeffs(self) -> "LaurentMatrix":
        """Entrywise conjugate of the coefficients, exponents unchanged."""
        return LaurentMatrix({e: m.conj() for e, m in self._c.items()}, self.shape)

    def reflect(self) -> "LaurentMatrix":
        """Substitute ``z -> 1/z``."""
        return LaurentMatrix({-e: m for e, m in self._c.items()}, self.shape)

    def antipode(self) -> "LaurentMatrix":
        """Substitute ``z -> -z``."""
        return LaurentMatrix({e: m * (-1) ** (e % 2) for e, m in self._c.items()}, self.shape)

    def shift(self, k: int) -> "LaurentMatrix":
        """Multiply by ``z**k``."""
        return LaurentMatrix({e + k: m for e, m in self._c.items()}, self.shape)

    def truncate(self, lo=None, hi=None) -> "LaurentMatrix":
        """Keep exponents in ``[lo, hi]`` (either bound may be ``None``)."""
        d = {e: m for e, m in self._c.items()
             if (lo is None or e >= lo) and (hi is None or e <= hi)}
        return LaurentMatrix(d, self.shape)

    def principal_part(self) -> "LaurentMatrix":
        """Terms with negative exponent."""
        return self.truncate(hi=-1)

    def pruned(self, tol: float) -> "LaurentMatrix":
        """Zero every entry with modulus at most ``tol``."""
        d = {}
        for e, m in self._c.items():
            m = np.where(np.abs(m) > tol, m, 0)
            d[e] = m
        return LaurentMatrix(d, self.shape)

    def evaluate(self, z) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for e, m in self._c.items():
            out = out + m * complex(z) ** e
        return out

    def max_abs(self) -> float:
        return max((float(np.abs(m).max()) for m in self._c.values()), default=0.0)

    def allclose(self, other, atol: float = 1e-10) -> bool:
        other = _as_laurent(other, self.shape)
        if other.shape != self.shape:
            return False
        return (self - other).max_abs() <= atol

    def __repr__(self):
        terms = ", ".join(f"z^{e}" for e in self._c)
        return f"LaurentMatrix(shape={self.shape}, support=[{terms}])"


def _as_laurent(x, shape) -> LaurentMatrix:
    if isinstance(x, LaurentMatrix):
        return x
    if np.isscalar(x):
        if shape[0] != shape[1]:
            raise ValidationError("scalar promotion needs a square shape")
        return LaurentMatrix({0: x * np.eye(shape[0])}, shape)
    return LaurentMatrix.constant(x)


def lmul(a: LaurentMatrix, b: LaurentMatrix) -> LaurentMatrix:
    """Product of two Laurent matrices (convolution over exponents).

    Raises
    ------
    ValidationError
        If the inner dimensions do not agree.
    """
    if a.shape[1] != b.shape[0]:
        raise ValidationError(f"inner shapes differ: {a.shape} @ {b.shape}")
    out: dict[int, np.ndarray] = {}
    for e1, m1 in a.items():
        for e2, m2 in b.items():
            e = e1 + e2
            p = m1 @ m2
            out[e] = out[e] + p if e in out else p
    return LaurentMatrix(out, (a.shape[0], b.shape[1]))


def linv_unit(a: LaurentMatrix, order: int, tol: float = 1e-13) -> LaurentMatrix:
    """Inverse of a Laurent matrix whose degree-0 coefficient is invertible.

    The inverse is built from the Neumann series
    ``a0^{-1} sum_k (-(a - a0) a0^{-1})**k``.  For one-sided input (only
    positive or only negative exponents besides 0) the series is truncated to
    the window ``[-order, order]``.  Two-sided input is accepted only when the
    series terminates, which happens e.g. for strictly triangular
    coefficients; otherwise no finite inverse exists in the window.

    Parameters
    ----------
    a : LaurentMatrix
        Square Laurent matrix.
    order : int
        Truncation window half-width.
    tol : float
        Terms below this size count as zero when testing termination.

    Returns
    -------
    LaurentMatrix
        ``b`` with ``a @ b == 1`` on exponents in ``[-order, order]``.
    """
    if a.shape[0] != a.shape[1]:
        raise ValidationError("linv_unit needs a square matrix")
    mu = a.shape[0]
    a0 = a.coeff(0)
    if np.linalg.matrix_rank(a0, tol=1e-12 * max(1.0, np.abs(a0).max())) < mu:
        raise ValidationError("degree-0 coefficient is not invertible")
    a0inv = np.linalg.inv(a0)
    rest = a.truncate(hi=-1) + a.truncate(lo=1)
    if rest.is_zero():
        return LaurentMatrix.constant(a0inv)
    two_sided = rest.min_exponent() < 0 < rest.max_exponent()
    step = lmul(-rest, LaurentMatrix.constant(a0inv))
    term = LaurentMatrix.identity(mu)
    total = LaurentMatrix.identity(mu)
    cap = max(order, 1) + 1 if not two_sided else mu * mu + 1
    for _ in range(cap):
        term = lmul(term, step).truncate(-order, order)
        if term.max_abs() <= tol:
            break
        total = total + term
    else:
        if two_sided and term.max_abs() > tol:
            raise ValidationError("two-sided Laurent matrix has no terminating inverse")
    return lmul(LaurentMatrix.constant(a0inv), total).truncate(-order, order)


# ---------------------------------------------------------------------------
# valuation-aware elimination

def lattice_columns(C: Sequence[np.ndarray]) -> list[LaurentMatrix]:
    """Columns of ``1 + sum_k z**(-k) C_k`` as ``mu x 1`` Laurent vectors."""
    A = LaurentMatrix.from_lattice(C)
    mu = A.shape[0]
    return [LaurentMatrix({e: m[:, j:j + 1] for e, m in A.items()}, (mu, 1))
            for j in range(mu)]


def _column_order(col: LaurentMatrix, alpha: Sequence[FracExponent], tol: float):
    best = None
    for e, m in col.items():
        for i in range(m.shape[0]):
            if abs(m[i, 0]) > tol:
                o = alpha[i] + e
                if best is None or o.key < best.key:
                    best = o
    return best


def _lead_vector(col: LaurentMatrix, alpha, order: FracExponent) -> np.ndarray:
    mu = len(alpha)
    v = np.zeros(mu, dtype=complex)
    for i in range(mu):
        diff = order - alpha[i]
        if diff.imag == 0.0 and diff.rational.denominator == 1:
            v[i] = col.coeff(int(diff.rational))[i, 0]
    return v


def is_good_basis(C: Sequence[np.ndarray], alpha: Sequence[FracExponent], tol: float = 0.0) -> bool:
    """Zero pattern test ``(C_k)_{ij} = 0`` whenever ``alpha_i - k < alpha_j``."""
    for k, c in enumerate(C, 1):
        c = np.asarray(c)
        for i in range(c.shape[0]):
            for j in range(c.shape[1]):
                if abs(c[i, j]) > tol and (alpha[i] - k).key < alpha[j].key:
                    return False
    return True


def valuation_eliminate(columns: Sequence[LaurentMatrix], alpha: Sequence, tol: float = 1e-10,
                        max_steps: int = 10000, return_basis: bool = False):
    """Leading orders of a basis adapted to the order filtration.

    Each column is a ``mu x 1`` Laurent vector over elementary sections
    ``s_i`` of order ``alpha[i]``, so the component ``z**m s_i`` has order
    ``alpha[i] + m``.  Whenever the leading vectors of columns in one class
    modulo the integers are linearly dependent, the dependent column of
    highest order is replaced by the matching combination (with integer
    powers of ``z`` aligning the orders).  This is a unimodular change over
    power series, so the module is unchanged while its leading order strictly
    rises.

    Parameters
    ----------
    columns : sequence of LaurentMatrix
        Generators of the lattice.
    alpha : sequence
        Orders of the reference elementary sections.
    tol : float
        Relative pruning tolerance for cancelled coefficients.
    return_basis : bool
        If true also return the adapted columns and their orders.

    Returns
    -------
    list of FracExponent
        Sorted leading orders (the spectrum).

    Raises
    ------
    RankError
        If the columns do not generate a module of full rank.
    """
    alpha = [FracExponent.parse(a) for a in alpha]
    mu = len(alpha)
    if len(columns) != mu:
        raise RankError(f"expected {mu} columns, got {len(columns)}")
    # columns are kept at unit size so that one absolute cut fits all of them
    cut = tol
    cols = [(c * (1.0 / c.max_abs())).pruned(cut) if c.max_abs() > 0 else c for c in columns]
    for _ in range(max_steps):
        orders = []
        for c in cols:
            o = _column_order(c, alpha, cut)
            if o is None:
                raise RankError("a column vanished during elimination; lattice is rank deficient")
            orders.append(o)
        changed = False
        classes: dict = {}
        for j, o in enumerate(orders):
            classes.setdefault(o.class_key(), []).append(j)
        for idx in classes.values():
            if len(idx) < 2:
                continue
            L = np.column_stack([_lead_vector(cols[j], alpha, orders[j]) for j in idx])
            _, s, vh = np.linalg.svd(L)
            rank = int((s > 1e-9 * max(1.0, s[0])).sum())
            if rank == len(idx):
                continue
            c = vh[-1].conj()
            involved = [k for k in range(len(idx)) if abs(c[k]) > 1e-9 * np.abs(c).max()]
            # highest order is forced (shifts must be nonnegative); among ties take the
            # largest coefficient so the update stays well conditioned
            k0 = max(involved, key=lambda k: (orders[idx[k]].key, abs(c[k]), -k))
            j0 = idx[k0]
            new = LaurentMatrix.zeros((mu, 1))
            for k in involved:
                j = idx[k]
                shift = orders[j0] - orders[j]
                new = new + cols[j].shift(int(shift.rational)) * (c[k] / c[k0])
            new = new.pruned(cut * max(1.0, new.max_abs()))
            m = new.max_abs()
            cols[j0] = new * (1.0 / m) if m > 0 else new
            changed = True
            break
        if not changed:
            spec = sorted(orders, key=lambda o: o.key)
            return (spec, cols, orders) if return_basis else spec
    raise RankError("elimination did not terminate")


# ---------------------------------------------------------------------------
# exact elimination over the rationals

def _q(x) -> Fraction:
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag != 0:
            raise ValidationError("exact elimination needs real rational coefficients")
        x = x.real
    return Fraction(x)


def exact_matmul(a: Mapping[int, Sequence], b: Mapping[int, Sequence]) -> dict:
    """Product of Laurent matrices stored as ``{exponent: rows of rationals}``."""
    out: dict = {}
    for ea, ma in a.items():
        ma = [[_q(x) for x in row] for row in ma]
        for eb, mb in b.items():
            mb = [[_q(x) for x in row] for row in mb]
            acc = out.setdefault(ea + eb, [[Fraction(0)] * len(mb[0]) for _ in ma])
            for i, row in enumerate(ma):
                for k, x in enumerate(row):
                    if x:
                        for j, y in enumerate(mb[k]):
                            acc[i][j] += x * y
    return {e: m for e, m in out.items() if any(any(r) for r in m)}


def exact_lattice_columns(A: Mapping[int, Sequence]) -> list[dict]:
    """Columns ``{exponent: [rationals]}`` of an exact Laurent matrix."""
    mu = len(next(iter(A.values())))
    cols = []
    for j in range(mu):
        col = {e: [_q(m[i][j]) for i in range(mu)] for e, m in A.items()}
        cols.append({e: v for e, v in col.items() if any(v)})
    return cols


def _rational_null_vector(L: list[list[Fraction]]):
    """A nonzero kernel vector of the rational matrix ``L`` or None."""
    rows, ncol = len(L), len(L[0])
    M = [list(r) for r in L]
    piv_cols, r = [], 0
    for c in range(ncol):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(ncol) if c not in piv_cols]
    if not free:
        return None
    f = free[0]
    v = [Fraction(0)] * ncol
    v[f] = Fraction(1)
    for i, c in enumerate(piv_cols):
        v[c] = -M[i][f]
    return v


def valuation_eliminate_exact(columns: Sequence[Mapping[int, Sequence]], alpha: Sequence,
                              max_steps: int = 100000, return_basis: bool = False):
    """Exact version of :func:`valuation_eliminate` for rational coefficients.

    ``columns[j]`` maps an exponent ``m`` to the coefficient vector of
    ``z**m`` over the sections ``s_i``.  All arithmetic is in
    :class:`fractions.Fraction`, so cancellations are exact.
    """
    alpha = [FracExponent.parse(a) for a in alpha]
    mu = len(alpha)
    if len(columns) != mu:
        raise RankError(f"expected {mu} columns, got {len(columns)}")
    cols = [{int(e): [_q(x) for x in v] for e, v in c.items() if any(_q(x) for x in v)}
            for c in columns]

    def order(col):
        best = None
        for e, v in col.items():
            for i, x in enumerate(v):
                if x:
                    o = alpha[i] + e
                    if best is None or o.key < best.key:
                        best = o
        return best

    def lead(col, o):
        out = []
        for i in range(mu):
            d = o - alpha[i]
            ok = d.imag == 0.0 and d.rational.denominator == 1
            out.append(col.get(int(d.rational), [Fraction(0)] * mu)[i] if ok else Fraction(0))
        return out

    for _ in range(max_steps):
        orders = []
        for c in cols:
            o = order(c)
            if o is None:
                raise RankError("a column vanished during elimination; lattice is rank deficient")
            orders.append(o)
        classes: dict = {}
        for j, o in enumerate(orders):
            classes.setdefault(o.class_key(), []).append(j)
        changed = False
        for idx in classes.values():
            if len(idx) < 2:
                continue
            leads = [lead(cols[j], orders[j]) for j in idx]
            L = [[leads[k][i] for k in range(len(idx))] for i in range(mu)]
            c = _rational_null_vector(L)
            if c is None:
                continue
            involved = [k for k in range(len(idx)) if c[k] != 0]
            k0 = max(involved, key=lambda k: (orders[idx[k]].key, -k))
            j0 = idx[k0]
            new: dict = {}
            for k in involved:
                j = idx[k]
                sh = int((orders[j0] - orders[j]).rational)
                f = c[k] / c[k0]
                for e, v in cols[j].items():
                    acc = new.setdefault(e + sh, [Fraction(0)] * mu)
                    for i, x in enumerate(v):
                        acc[i] += f * x
            cols[j0] = {e: v for e, v in new.items() if any(v)}
            changed = True
            break
        if not changed:
            spec = sorted(orders, key=lambda o: o.key)
            return (spec, cols, orders) if return_basis else spec
    raise RankError("elimination did not terminate")
