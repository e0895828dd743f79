import numpy as np
import pytest

from terpgeom import _backend, _kernels_py
from terpgeom.curvature import phi_value
from terpgeom.errors import DegenerateError, ValidationError
from terpgeom.example3 import principal_nilpotent
from terpgeom.phibound import decode, encode, phi_supremum_estimate, phi_supremum_search

needs_ext = pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled kernel not built")


def test_encode_roundtrip():
    A = principal_nilpotent(4)
    x = encode(A)
    assert x.shape == (20,)
    assert np.allclose(decode(x, 4), A)


@pytest.mark.parametrize("mu", [2, 3, 4])
def test_kernel_phi_matches_reference(mu):
    rng = np.random.default_rng(mu)
    x = rng.standard_normal(mu * (mu + 1))
    A = decode(x, mu)
    A = A / np.linalg.norm(A)
    c = A @ A.conj() - A.conj() @ A
    ref = -float(np.sum(np.abs(c) ** 2))
    assert _kernels_py.phi_of(x, mu) == pytest.approx(ref, rel=1e-12)
    if _backend.BACKEND == "cython":
        assert _backend.get("cython").phi_of(x, mu) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=needs_ext)])
def test_penalty_gradient_by_finite_differences(backend):
    kern = _backend.get(backend)
    mu = 3
    x = np.random.default_rng(5).standard_normal(mu * (mu + 1))
    g, grad = kern.penalty_of(x, mu)
    h = 1e-6
    fd = np.array([(kern.penalty_of(x + h * e, mu)[0] - kern.penalty_of(x - h * e, mu)[0]) / (2 * h)
                   for e in np.eye(x.size)])
    assert np.allclose(grad, fd, rtol=1e-6, atol=1e-6 * max(1.0, abs(g)))


def test_penalty_vanishes_on_nilpotent():
    x = encode(principal_nilpotent(3))
    g, grad = _kernels_py.penalty_of(x, 3)
    assert g < 1e-25 and np.abs(grad).max() < 1e-10


def test_mu2_supremum():
    res = phi_supremum_search(2, restarts=8, seed=0)
    assert res.value == pytest.approx(-2.0, abs=1e-6)
    assert res.best.violation < 1e-10
    assert phi_value(res.matrix) == pytest.approx(res.value, abs=1e-6)
    assert phi_supremum_estimate(2, restarts=8, seed=3) == pytest.approx(-2.0, abs=1e-6)


def test_python_fallback_mu2():
    res = phi_supremum_search(2, restarts=2, seed=0, backend="python")
    assert res.backend == "python"
    assert res.value == pytest.approx(-2.0, abs=1e-6)


@needs_ext
@pytest.mark.parametrize("mu", [2, 3])
def test_backends_agree_on_one_stage(mu):
    # long runs may part ways at saddles, so compare a single penalty stage
    x0 = np.random.default_rng([1, mu]).standard_normal(mu * (mu + 1))
    a = _backend.get("cython").ascend(x0, mu, rho_max=1.0, maxiter=30)
    b = _backend.get("python").ascend(x0, mu, rho_max=1.0, maxiter=30)
    assert np.abs(a[0] - b[0]).max() < 1e-8
    assert a[1] == pytest.approx(b[1], abs=1e-10)
    assert a[5] == b[5]


@needs_ext
def test_backends_reach_same_supremum():
    a = phi_supremum_search(2, restarts=3, seed=4, backend="python")
    b = phi_supremum_search(2, restarts=3, seed=4, backend="cython")
    assert a.value == pytest.approx(b.value, abs=1e-6)


@needs_ext
def test_mu3_estimate():
    res = phi_supremum_search(3, restarts=16, seed=0)
    assert -2.0 <= res.value < 0
    assert res.value == pytest.approx(-0.5, abs=1e-4)


@needs_ext
def test_thread_count_does_not_matter():
    a = phi_supremum_search(3, restarts=6, seed=2, workers=1)
    b = phi_supremum_search(3, restarts=6, seed=2, workers=3)
    assert [r.phi for r in a.restarts] == [r.phi for r in b.restarts]
    assert a.best.index == b.best.index


def test_seed_determinism():
    a = phi_supremum_search(2, restarts=4, seed=9)
    b = phi_supremum_search(2, restarts=4, seed=9)
    assert [r.phi for r in a.restarts] == [r.phi for r in b.restarts]


def test_infeasible_search_raises():
    with pytest.raises(DegenerateError):
        phi_supremum_search(3, restarts=2, seed=0, rho_max=1.0, maxiter=2)


@pytest.mark.parametrize("mu,restarts", [(1, 4), (2.5, 4), (2, 0)])
def test_argument_validation(mu, restarts):
    with pytest.raises(ValidationError):
        phi_supremum_search(mu, restarts=restarts)
