from fractions import Fraction

import numpy as np
import pytest
import sympy

from terpgeom.errors import DegenerateError, ScopeError, ValidationError
from terpgeom.example3 import Example3Config, example3_dC, example3_lattice
from terpgeom.terp import Lattice, TopologicalData
from terpgeom.twistor import (global_sections, kodaira_spencer, metric_gram, tangent_metric,
                              tau_reference, tau_squared)

z = sympy.Symbol("z")
J = sympy.Matrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]])


def _coeff(e, k):
    """Coefficient of z**k in the Laurent expansion at 0 of a rational function."""
    num, den = sympy.fraction(sympy.together(e))
    m = 0
    while sympy.expand(den).subs(z, 0) == 0:
        den = sympy.cancel(den / z)
        m += 1
    if k + m < 0:
        return sympy.Integer(0)
    s = sympy.series(num / den, z, 0, k + m + 1).removeO()
    return sympy.expand(s).coeff(z, k + m)


def exact_metric(r, t, D=4):
    """Exact gram and h(d/dr, d/dr) for real rational parameters.

    Sections ``p`` solve ``A(z) p(z) = J A(1/z) q(1/z)`` with polynomial
    ``p, q``; they are normalised by ``p(0) = I``.  The gram is the constant
    ``(A p)^T J tau(p)(-z)`` and the metric is ``sum_k Tr(M_k G^-1 M_k^T G)``
    over the principal part of ``p^-1 A^-1 dA p``.
    """
    r, t = sympy.Rational(r), sympy.Rational(t)
    C1 = sympy.Matrix([[0, 0, 0], [r, 0, 0], [t, r, 0]])
    C2 = sympy.zeros(3)
    C2[2, 0] = r ** 2 / 2
    A = sympy.eye(3) + C1 / z + C2 / z ** 2
    ps = sympy.symbols(f"p0:{3 * (D + 1)}")
    qs = sympy.symbols(f"q0:{3 * (D + 1)}")
    p = sum((sympy.Matrix(ps[3 * d:3 * d + 3]) * z ** d for d in range(D + 1)), sympy.zeros(3, 1))
    q = sum((sympy.Matrix(qs[3 * d:3 * d + 3]) * z ** d for d in range(D + 1)), sympy.zeros(3, 1))
    expr = sympy.expand((A * p - J * A.subs(z, 1 / z) * q.subs(z, 1 / z)) * z ** (D + 2))
    eqs = [c for e in expr for c in sympy.Poly(e, z).coeffs()]
    M = sympy.Matrix([[sympy.diff(e, v) for v in ps + qs] for e in eqs])
    ns = M.nullspace()
    N = sympy.Matrix.hstack(*ns)
    Pc = [N[3 * d:3 * d + 3, :] for d in range(D + 1)]
    if len(ns) != 3 or Pc[0].det() == 0:
        return len(ns), None, None
    Ei = Pc[0].inv()
    P = sum((Pc[d] * Ei * z ** d for d in range(D + 1)), sympy.zeros(3))
    tau = J * A.subs(z, 1 / z) * P.subs(z, 1 / z)
    G = ((A * P).T * J * tau.subs(z, -z)).applyfunc(lambda e: _coeff(sympy.simplify(e), 0))
    dA = sympy.Matrix([[0, 0, 0], [1, 0, 0], [0, 1, 0]]) / z
    dA[2, 0] = r / z ** 2
    X = (P.inv() * A.inv() * dA * P).applyfunc(sympy.cancel)
    h = 0
    for k in range(1, 5):
        Mk = X.applyfunc(lambda e: _coeff(e, -k))
        h += (Mk * G.inv() * Mk.T * G).trace()
    return len(ns), G, sympy.nsimplify(sympy.simplify(h))


def lattice(r, t=0.0):
    return example3_lattice(Example3Config(r=r, t=t))


def metric_r(r, t=0.0):
    lat = lattice(r, t)
    return tangent_metric(lat, kodaira_spencer(lat, example3_dC(Example3Config(r=r, t=t), "r")))


@pytest.mark.parametrize("r,t", [("1/2", "0"), ("1", "0"), ("3/2", "0"), ("1/2", "1/3"), ("1", "1/10")])
def test_metric_against_exact_oracle(r, t):
    h0, G, h = exact_metric(r, t)
    rf, tf = float(Fraction(r)), float(Fraction(t))
    rep = metric_gram(lattice(rf, tf))
    assert rep.globalSectionDim == h0 == 3
    assert np.allclose(rep.gram, np.array(G.evalf(), dtype=complex), rtol=1e-10, atol=1e-12)
    assert metric_r(rf, tf) == pytest.approx(float(h), rel=1e-10)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 1.3, 1.6, 2.0, 2.9])
def test_metric_on_slice_t0(r):
    rho = r * r / 2
    assert metric_r(r) == pytest.approx(2 / (1 - rho) ** 2, rel=1e-9)


def test_gram_at_origin():
    rep = metric_gram(lattice(0.0))
    assert np.allclose(rep.gram, np.eye(3)) and rep.signature == (3, 0)
    assert rep.z_residual < 1e-12


def test_tau_is_involution():
    for r, t in [(0.0, 0.0), (1.0, 0.2), (0.3 + 0.2j, -0.5j)]:
        T2 = tau_squared(lattice(r, t))
        assert np.allclose(T2.coeff(0), np.eye(3), atol=1e-12)
        assert all(np.abs(M).max() < 1e-12 for e, M in T2.items() if e != 0)


def test_tau_reference_of_family():
    T0 = tau_reference(lattice(0.0).topo)
    assert T0.support == [0]
    assert np.allclose(T0.coeff(0), np.fliplr(np.eye(3)))


def test_nonzero_N_out_of_scope():
    topo = TopologicalData(mu=2, weight=1, alpha_ref=["0", "0"], N=np.array([[0, 0], [1, 0]]),
                           S=np.array([[0, -1], [1, 0]]), kappa=np.eye(2), Pmat=np.array([[0, -1], [1, 0]]))
    with pytest.raises(ScopeError):
        metric_gram(Lattice(topo, []))


@pytest.mark.parametrize("r,t,sig", [
    (0.5, 0.5, (3, 0)), (2.0, 0.5, (3, 0)), (1.8, 0.01, (3, 0)),
    (0.5, 2.0, (1, 2)), (2.0, 3.0, (1, 2)), (0.0, 2.0, (1, 2)),
])
def test_signature_regions(r, t, sig):
    rep = metric_gram(lattice(r, t))
    assert rep.pure and rep.signature == sig


def test_wall_is_not_pure():
    rep = metric_gram(lattice(np.sqrt(2)), strict=False)
    assert not rep.pure and rep.globalSectionDim == 4
    with pytest.raises(ValidationError):
        metric_gram(lattice(np.sqrt(2)))


def test_exact_wall_point():
    h0, G, _ = exact_metric(0, 1)
    assert G is None
    rep = metric_gram(lattice(0.0, 1.0), strict=False)
    assert not rep.pure


def test_indefinite_gram_has_no_tangent_metric():
    lat = lattice(0.5, 2.0)
    with pytest.raises(ValidationError):
        tangent_metric(lat, kodaira_spencer(lat, example3_dC(Example3Config(r=0.5, t=2.0), "r")))


def test_large_parameter_metric():
    cfg = Example3Config(r=1000.0)
    lat = example3_lattice(cfg)
    h = tangent_metric(lat, kodaira_spencer(lat, example3_dC(cfg, "inv_r")))
    rho = cfg.rho
    assert h == pytest.approx(8 * rho ** 2 / (1 - rho) ** 2, rel=1e-6)


def test_zero_threshold_controls_degeneracy():
    lat = lattice(1.0, 0.2)
    rep = metric_gram(lat, zero_threshold=0.0)
    assert rep.signature == (3, 0)
    with pytest.raises(DegenerateError):
        metric_gram(lat, zero_threshold=10.0)
    assert metric_gram(lat, strict=False, zero_threshold=10.0).signature is None


def test_global_sections_solve_the_gluing():
    lat = lattice(0.7, 0.1 + 0.2j)
    gs = global_sections(lat)
    assert gs.dim == 3
    assert np.linalg.matrix_rank(gs.evaluation) == 3
