import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from terpgeom.errors import ValidationError
from terpgeom.jets import (Jet2, jet_adjoint, jet_conj, jet_derivatives, jet_inv, jet_kron,
                           jet_mul, jet_poly_inv, jet_poly_mul, jet_transpose)

# faithful representation of C[t, s]/(t^2, s^2): t -> n (x) 1, s -> 1 (x) n
_n = np.array([[0.0, 0.0], [1.0, 0.0]])
T = np.kron(_n, np.eye(2))
S = np.kron(np.eye(2), _n)


def rep(a: Jet2) -> np.ndarray:
    return (np.kron(a.c00, np.eye(4)) + np.kron(a.c10, T) + np.kron(a.c01, S)
            + np.kron(a.c11, T @ S))


def rand_jet(rng, shape):
    f = lambda: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return Jet2(f(), f(), f(), f())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_product_matches_representation(seed, m):
    rng = np.random.default_rng(seed)
    a, b = rand_jet(rng, (m, m)), rand_jet(rng, (m, m))
    assert np.allclose(rep(jet_mul(a, b)), rep(a) @ rep(b))
    assert np.allclose(rep(a @ b), rep(a) @ rep(b))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_inverse(seed, m):
    rng = np.random.default_rng(seed)
    a = rand_jet(rng, (m, m))
    a = Jet2(a.c00 + 3 * m * np.eye(m), a.c10, a.c01, a.c11)
    assert jet_mul(a, jet_inv(a)).allclose(Jet2.identity(m), 1e-9)
    assert np.allclose(rep(jet_inv(a)), np.linalg.inv(rep(a)))


def test_inverse_singular():
    with pytest.raises(ValidationError):
        jet_inv(Jet2.constant(np.zeros((2, 2))))


def test_kron_rule():
    rng = np.random.default_rng(2)
    a, b = rand_jet(rng, (2, 2)), rand_jet(rng, (3, 3))
    k = jet_kron(a, b)
    assert k.shape == (6, 6)
    assert np.allclose(k.c11, np.kron(a.c11, b.c00) + np.kron(a.c10, b.c01)
                       + np.kron(a.c01, b.c10) + np.kron(a.c00, b.c11))


def test_adjoint_is_antiautomorphism():
    rng = np.random.default_rng(4)
    a, b = rand_jet(rng, (3, 3)), rand_jet(rng, (3, 3))
    assert jet_adjoint(a @ b).allclose(jet_adjoint(b) @ jet_adjoint(a))
    assert jet_adjoint(jet_adjoint(a)).allclose(a)
    assert jet_transpose(a @ b).allclose(jet_transpose(b) @ jet_transpose(a))


def test_conjugation_of_linear_jet():
    D = np.array([[1, 1j], [1j, -1]])
    x = Jet2.linear(D)
    c = jet_conj(x)
    assert np.allclose(c.c01, D.conj()) and np.allclose(c.c10, 0)
    d10, d01, d11 = jet_derivatives(x @ c)
    assert np.allclose(d11, D @ D.conj())
    assert np.allclose(d10, 0) and np.allclose(d01, 0)


def test_evaluate_first_order():
    rng = np.random.default_rng(5)
    a, b = rand_jet(rng, (2, 2)), rand_jet(rng, (2, 2))
    t = 1e-4 * (1 + 1j)
    # products agree with pointwise products up to dropped t^2 terms
    err = np.abs((a @ b).evaluate(t) - a.evaluate(t) @ b.evaluate(t)).max()
    assert err < 1e-6


@pytest.mark.parametrize("n", [1, 2, 4])
def test_poly_inverse(n):
    rng = np.random.default_rng(n)
    p = [rand_jet(rng, (2, 2)) for _ in range(n)]
    p[0] = Jet2(p[0].c00 + 5 * np.eye(2), p[0].c10, p[0].c01, p[0].c11)
    q = jet_poly_inv(p, n)
    prod = jet_poly_mul(p, q, n)
    assert prod[0].allclose(Jet2.identity(2), 1e-9)
    for k in range(1, n):
        assert prod[k].allclose(Jet2.constant(np.zeros((2, 2))), 1e-9)
