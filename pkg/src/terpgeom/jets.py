"""Truncated jets in one complex parameter ``t`` and its conjugate.

A :class:`Jet2` stores the four coefficients of
``a00 + t a10 + tbar a01 + t tbar a11`` in the ring where ``t**2`` and
``tbar**2`` vanish.  Coefficients are complex arrays of one common shape.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "Jet2",
    "jet_mul",
    "jet_inv",
    "jet_conj",
    "jet_adjoint",
    "jet_transpose",
    "jet_kron",
    "jet_derivatives",
    "jet_poly_mul",
    "jet_poly_inv",
]


@dataclass(frozen=True)
class Jet2:
    """Value, ``d/dt``, ``d/dtbar`` and mixed coefficient of a matrix jet."""

    c00: np.ndarray
    c10: np.ndarray
    c01: np.ndarray
    c11: np.ndarray

    def __post_init__(self):
        parts = [np.asarray(p, dtype=complex) for p in (self.c00, self.c10, self.c01, self.c11)]
        shape = parts[0].shape
        if any(p.shape != shape for p in parts):
            raise ValidationError("jet coefficients must share one shape")
        for name, p in zip(("c00", "c10", "c01", "c11"), parts):
            object.__setattr__(self, name, p)

    @classmethod
    def constant(cls, m) -> "Jet2":
        m = np.asarray(m, dtype=complex)
        z = np.zeros_like(m)
        return cls(m, z, z, z)

    @classmethod
    def identity(cls, n: int) -> "Jet2":
        return cls.constant(np.eye(n))

    @classmethod
    def linear(cls, delta) -> "Jet2":
        """The jet of ``t * delta``."""
        d = np.asarray(delta, dtype=complex)
        z = np.zeros_like(d)
        return cls(z, d, z, z)

    @property
    def shape(self):
        return self.c00.shape

    def parts(self):
        return self.c00, self.c10, self.c01, self.c11

    def __add__(self, other):
        other = _as_jet(other, self.shape)
        return Jet2(*(a + b for a, b in zip(self.parts(), other.parts())))

    __radd__ = __add__

    def __neg__(self):
        return Jet2(*(-a for a in self.parts()))

    def __sub__(self, other):
        return self + (-_as_jet(other, self.shape))

    def __rsub__(self, other):
        return _as_jet(other, self.shape) - self

    def __mul__(self, s):
        if isinstance(s, Jet2):
            raise TypeError("use @ or jet_mul for jet products")
        return Jet2(*(s * a for a in self.parts()))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return jet_mul(self, _as_jet(other, None))

    def __rmatmul__(self, other):
        return jet_mul(_as_jet(other, None), self)

    def allclose(self, other, atol=1e-10) -> bool:
        other = _as_jet(other, self.shape)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.parts(), other.parts()))

    def evaluate(self, t: complex) -> np.ndarray:
        """Value at a small ``t`` (second-order terms in ``t``, ``tbar`` dropped)."""
        tb = np.conj(t)
        return self.c00 + t * self.c10 + tb * self.c01 + t * tb * self.c11


def _as_jet(x, shape) -> Jet2:
    if isinstance(x, Jet2):
        return x
    if np.isscalar(x):
        if shape is None:
            raise TypeError("cannot promote a scalar without a shape")
        return Jet2.constant(x * np.eye(shape[0]))
    return Jet2.constant(x)


def _mul(x, y, op):
    return Jet2(
        op(x.c00, y.c00),
        op(x.c10, y.c00) + op(x.c00, y.c10),
        op(x.c01, y.c00) + op(x.c00, y.c01),
        op(x.c11, y.c00) + op(x.c10, y.c01) + op(x.c01, y.c10) + op(x.c00, y.c11),
    )


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    """Matrix product of jets with ``t**2 = tbar**2 = 0``."""
    if a.shape[-1] != b.shape[0]:
        raise ValidationError(f"shape mismatch {a.shape} @ {b.shape}")
    return _mul(a, b, np.matmul)


def jet_kron(a: Jet2, b: Jet2) -> Jet2:
    """Kronecker product of jets."""
    return _mul(a, b, np.kron)


def jet_inv(a: Jet2) -> Jet2:
    """Inverse jet; requires an invertible value part.

    Raises
    ------
    ValidationError
        If ``a.c00`` is singular.
    """
    c = a.c00
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError("jet_inv needs square coefficients")
    if np.linalg.matrix_rank(c) < c.shape[0]:
        raise ValidationError("value part of the jet is singular")
    ci = np.linalg.inv(c)
    i10 = -ci @ a.c10 @ ci
    i01 = -ci @ a.c01 @ ci
    i11 = -ci @ (a.c11 @ ci + a.c10 @ i01 + a.c01 @ i10)
    return Jet2(ci, i10, i01, i11)


def jet_conj(a: Jet2) -> Jet2:
    """Complex conjugation: swaps the roles of ``t`` and ``tbar``."""
    return Jet2(a.c00.conj(), a.c01.conj(), a.c10.conj(), a.c11.conj())


def jet_transpose(a: Jet2) -> Jet2:
    return Jet2(a.c00.T, a.c10.T, a.c01.T, a.c11.T)


def jet_adjoint(a: Jet2) -> Jet2:
    """Conjugate transpose, an involutive anti-automorphism of the jet ring."""
    return jet_transpose(jet_conj(a))


def jet_derivatives(a: Jet2):
    """Return ``(d_t a, d_tbar a, d_tbar d_t a)`` at ``t = 0``."""
    return a.c10, a.c01, a.c11


# polynomials in an auxiliary nilpotent variable with jet coefficients

def jet_poly_mul(p: list[Jet2], q: list[Jet2], n: int, op=jet_mul) -> list[Jet2]:
    """Product of jet polynomials ``sum p_k x**k`` truncated below ``x**n``."""
    out = []
    for k in range(n):
        acc = None
        for i in range(k + 1):
            if i < len(p) and k - i < len(q):
                term = op(p[i], q[k - i])
                acc = term if acc is None else acc + term
        if acc is None:
            shp = op(p[0], q[0]).shape
            acc = Jet2.constant(np.zeros(shp, dtype=complex))
        out.append(acc)
    return out


def jet_poly_inv(p: list[Jet2], n: int) -> list[Jet2]:
    """Inverse of ``sum p_k x**k`` modulo ``x**n`` (needs invertible ``p_0``)."""
    inv0 = jet_inv(p[0])
    out = [inv0]
    for k in range(1, n):
        acc = None
        for i in range(1, k + 1):
            if i < len(p):
                term = jet_mul(p[i], out[k - i])
                acc = term if acc is None else acc + term
        if acc is None:
            acc = Jet2.constant(np.zeros(inv0.shape, dtype=complex))
        out.append(-jet_mul(inv0, acc))
    return out
