"""The rank-3 two-parameter family and other small reference constructions.

The family has orders ``(alpha1, 0, -alpha1)`` with ``alpha1`` in
``(-3/2, -1)``, weight 0, semisimple monodromy, and basis

    v1 = s1 + r z^-1 s2 + (r^2/2) z^-2 s3 + t z^-1 s3
    v2 = s2 + r z^-1 s3
    v3 = s3
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import ConsistencyError, ValidationError
from .laurent import FracExponent
from .terp import Filtration, Lattice, TopologicalData

__all__ = [
    "Example3Config",
    "Example3Expected",
    "example3_topology",
    "example3_lattice",
    "example3_expected",
    "example3_reference_flag",
    "example3_dC",
    "example3_gamma",
    "wall_modulus",
    "polarization_sign",
    "locate_wall",
    "principal_nilpotent",
    "horizontal_witness",
]

DEFAULT_ALPHA1 = Fraction(-5, 4)


@dataclass(frozen=True)
class Example3Config:
    """Parameters of the family; ``alpha1`` must lie in ``(-3/2, -1)``."""

    alpha1: Fraction = DEFAULT_ALPHA1
    r: complex = 0j
    t: complex = 0j

    def __post_init__(self):
        a = FracExponent.parse(self.alpha1)
        if a.imag != 0 or not (Fraction(-3, 2) < a.rational < -1):
            raise ValidationError("alpha1 must be a real number in (-3/2, -1)")
        object.__setattr__(self, "alpha1", a.rational)
        object.__setattr__(self, "r", complex(self.r))
        object.__setattr__(self, "t", complex(self.t))

    @property
    def rho(self) -> float:
        return abs(self.r) ** 2 / 2

    @property
    def theta(self) -> float:
        return abs(self.t) ** 2


def example3_gamma(alpha1=DEFAULT_ALPHA1) -> complex:
    """``gamma = -Gamma(alpha1 + 2) Gamma(alpha3 - 1) / (2 pi i)``."""
    a1 = mpmath.mpf(Fraction(alpha1).numerator) / Fraction(alpha1).denominator
    g = -mpmath.gamma(a1 + 2) * mpmath.gamma(-a1 - 1) / (2j * mpmath.pi)
    return complex(g)


def example3_topology(alpha1=DEFAULT_ALPHA1) -> TopologicalData:
    cfg = Example3Config(alpha1)
    a1 = cfg.alpha1
    J = np.fliplr(np.eye(3)).astype(complex)
    g = example3_gamma(a1)
    S = np.array([[0, 0, g], [0, 1, 0], [-g, 0, 0]], dtype=complex)
    return TopologicalData(
        mu=3, weight=0, alpha_ref=[a1, Fraction(0), -a1],
        N=np.zeros((3, 3)), S=S, kappa=J, Pmat=J,
    )


def example3_lattice(cfg: Example3Config) -> Lattice:
    r, t = cfg.r, cfg.t
    C1 = np.array([[0, 0, 0], [r, 0, 0], [t, r, 0]], dtype=complex)
    C2 = np.zeros((3, 3), dtype=complex)
    C2[2, 0] = r * r / 2
    return Lattice(example3_topology(cfg.alpha1), [C1, C2])


def example3_dC(cfg: Example3Config, direction: str = "r") -> list[np.ndarray]:
    """Derivatives of ``(C_1, C_2)`` along ``d/dr``, ``d/dt`` or ``d/d(1/r)``."""
    r = cfg.r
    E = lambda i, j: np.eye(3, dtype=complex)[:, [i]] @ np.eye(3, dtype=complex)[[j], :]
    if direction == "r":
        return [E(1, 0) + E(2, 1), r * E(2, 0)]
    if direction == "t":
        return [E(2, 0), np.zeros((3, 3), dtype=complex)]
    if direction == "inv_r":
        if r == 0:
            raise ValidationError("d/d(1/r) needs r != 0")
        return [-(r ** 2) * d for d in example3_dC(cfg, "r")]
    raise ValidationError(f"unknown direction {direction!r}")


def example3_reference_flag(alpha1=DEFAULT_ALPHA1) -> Filtration:
    """``F^1 = <A1>``, ``F^0 = F^-1 = <A1, A2>``, ``F^-2 = everything``."""
    e = np.eye(3, dtype=complex)
    return Filtration({-2: e, -1: e[:, :2], 0: e[:, :2], 1: e[:, :1]}, 3)


def wall_modulus(r) -> float:
    """``|t|`` on the purity wall for given ``r``: ``(1 - rho)**2``."""
    rho = abs(r) ** 2 / 2
    return (1 - rho) ** 2


def polarization_sign(cfg: Example3Config) -> int:
    """+1 for a positive definite gram, -1 for an indefinite one, 0 if not pure.

    Signs are read off without a zero threshold, so points very close to the
    wall are still classified; points where the gram cannot be resolved in
    double precision count as 0.
    """
    from .twistor import metric_gram

    try:
        rep = metric_gram(example3_lattice(cfg), strict=False, zero_threshold=0.0)
    except ConsistencyError:
        # rounding dominates this close to the wall
        return 0
    if rep.signature is None:
        return 0
    return 1 if rep.signature[1] == 0 else -1


def locate_wall(r, phase: float = 0.0, lo: float = 0.0, hi: float | None = None,
                tol: float = 1e-7, alpha1=DEFAULT_ALPHA1) -> float:
    """Bisect ``|t|`` along ``t = s exp(i phase)`` for the sign change of the polarization.

    ``lo`` must be on the positive side and ``hi`` on the other one.

    Raises
    ------
    ValidationError
        If the bracket does not straddle a sign change.
    """
    import cmath

    u = cmath.exp(1j * phase)
    sign = lambda s: polarization_sign(Example3Config(alpha1, r, s * u))
    if hi is None:
        hi = 2 * wall_modulus(r) + 1
    if sign(lo) != 1 or sign(hi) != -1:
        raise ValidationError("bracket does not straddle the wall")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        sm = sign(mid)
        if sm == 0:
            # on the wall itself up to rounding
            return mid
        lo, hi = (mid, hi) if sm == 1 else (lo, mid)
    return (lo + hi) / 2


@dataclass(frozen=True)
class Example3Expected:
    pure: bool
    wall: float
    metric_rr: float
    metric_inv_r: float
    rho: float
    theta: float


def example3_expected(cfg: Example3Config) -> Example3Expected:
    """Closed-form expectations for the family.

    ``metric_rr`` and ``metric_inv_r`` are the reference closed forms on the
    slice ``t = 0``: ``2(1+rho^2)/(1-rho)^4`` and
    ``8 rho^2 (1+rho^2)/(1-rho)^4``.
    """
    rho, theta = cfg.rho, cfg.theta
    wall = (1 - rho) ** 2
    off = (1 - rho) ** 4 - theta
    with np.errstate(divide="ignore"):
        mrr = 2 * (1 + rho ** 2) / (1 - rho) ** 4 if rho != 1 else math.inf
        minv = 8 * rho ** 2 * (1 + rho ** 2) / (1 - rho) ** 4 if rho != 1 else math.inf
    return Example3Expected(bool(off != 0), wall, mrr, minv, rho, theta)


# ---------------------------------------------------------------------------
# other reference constructions

def principal_nilpotent(mu: int) -> np.ndarray:
    """Symmetric nilpotent matrix in the principal nilpotent orbit.

    The real principal nilpotent ``e`` with subdiagonal ``sqrt(j (mu - j))``
    is conjugated by a unitary ``U`` with ``U U^T = J`` (the antidiagonal
    permutation), which makes the result symmetric while keeping
    ``||[A, conj A]||`` and ``||A||`` unchanged.  Normalised to unit
    Frobenius norm.
    """
    e = np.zeros((mu, mu))
    for j in range(1, mu):
        e[j, j - 1] = math.sqrt(j * (mu - j))
    U = np.zeros((mu, mu), dtype=complex)
    s = 1 / math.sqrt(2)
    for j in range(mu // 2):
        k = mu - 1 - j
        U[j, j], U[k, j] = s, s
        U[j, k], U[k, k] = 1j * s, -1j * s
    if mu % 2:
        U[mu // 2, mu // 2] = 1
    A = U.conj().T @ e @ U
    A = (A + A.T) / 2  # exact up to rounding
    return A / np.linalg.norm(A)


def horizontal_witness(c: complex = 0.0):
    """Data for the rank-drop construction in rank 4.

    Orders ``(-21/10, -7/10, 7/10, 21/10)`` satisfy
    ``alpha_4 - 2 > alpha_3 - 1 > alpha_2``; ``C_1 = c (E_43 + E_21)``.

    Returns
    -------
    U, Pmat, alpha
        ``U_ij = (alpha_i - 1 - alpha_j) (C_1)_ij``, antidiagonal ``Pmat``
        and the orders.
    """
    alpha = [Fraction(-21, 10), Fraction(-7, 10), Fraction(7, 10), Fraction(21, 10)]
    C1 = np.zeros((4, 4), dtype=complex)
    C1[3, 2] = c
    C1[1, 0] = c
    U = np.array([[float(alpha[i] - 1 - alpha[j]) * C1[i, j] for j in range(4)] for i in range(4)])
    Pmat = np.fliplr(np.eye(4)).astype(complex)
    return U, Pmat, [FracExponent(a) for a in alpha]
