"""Multi-start estimate of the supremum of phi over symmetric nilpotents.

Each restart draws a random symmetric matrix, normalises it, and ascends
``phi(A) - rho ||A^mu||^2`` with ``rho`` doubled until ``||A^mu|| < 1e-10``.
Restarts are independent; the reduction takes the largest phi and breaks
ties by the lowest restart index.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DegenerateError, ValidationError

__all__ = ["RestartResult", "PhiSearchResult", "encode", "decode", "phi_supremum_search",
           "phi_supremum_estimate"]

FEASIBILITY_TOL = 1e-10


def encode(A) -> np.ndarray:
    """Real parameter vector of a symmetric matrix (upper triangle, re then im)."""
    A = np.asarray(A, dtype=complex)
    iu = np.triu_indices(A.shape[0])
    return np.concatenate([A[iu].real, A[iu].imag])


def decode(x, mu: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = mu * (mu + 1) // 2
    iu = np.triu_indices(mu)
    A = np.zeros((mu, mu), dtype=complex)
    A[iu] = x[:h] + 1j * x[h:]
    A.T[iu] = A[iu]
    return A


@dataclass(frozen=True)
class RestartResult:
    index: int
    phi: float
    violation: float
    rho: float
    feasible: bool
    iterations: int
    x: np.ndarray


@dataclass(frozen=True)
class PhiSearchResult:
    mu: int
    seed: int
    best: RestartResult
    restarts: tuple
    backend: str

    @property
    def value(self) -> float:
        return self.best.phi

    @property
    def matrix(self) -> np.ndarray:
        A = decode(self.best.x, self.mu)
        return A / np.linalg.norm(A)

    @property
    def n_feasible(self) -> int:
        return sum(r.feasible for r in self.restarts)


def _run(kern, mu, seed, i, kw):
    x0 = np.random.default_rng([seed, i]).standard_normal(mu * (mu + 1))
    x, phi, viol, rho, feas, its = kern.ascend(x0, mu, feas_tol=FEASIBILITY_TOL, **kw)
    return RestartResult(i, float(phi), float(viol), float(rho), bool(feas), int(its), np.asarray(x))


def phi_supremum_search(mu: int, restarts: int = 64, seed: int = 0, *, workers: int | None = None,
                        backend: str | None = None, **kw) -> PhiSearchResult:
    """Run the multi-start search and keep every restart record.

    Parameters
    ----------
    mu : int
        Matrix size, at least 2.
    restarts : int
        Number of independent starts; restart ``i`` uses the generator
        ``default_rng([seed, i])``.
    workers : int, optional
        Thread count; the compiled kernel releases the GIL.  The result does
        not depend on it.
    backend : {"cython", "python"}, optional
        Override the kernel chosen at import.

    Raises
    ------
    DegenerateError
        If no restart reaches the feasibility tolerance.
    """
    if int(mu) != mu or mu < 2:
        raise ValidationError("mu must be an integer >= 2")
    if restarts < 1:
        raise ValidationError("restarts must be positive")
    mu, restarts, seed = int(mu), int(restarts), int(seed)
    kern = _backend.get(backend)
    name = backend or _backend.BACKEND
    if workers is None:
        workers = min(4, os.cpu_count() or 1) if name == "cython" else 1
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            res = list(ex.map(lambda i: _run(kern, mu, seed, i, kw), range(restarts)))
    else:
        res = [_run(kern, mu, seed, i, kw) for i in range(restarts)]
    res.sort(key=lambda r: r.index)
    feas = [r for r in res if r.feasible]
    if not feas:
        raise DegenerateError(f"no feasible iterate in {restarts} restarts (mu = {mu})")
    best = max(feas, key=lambda r: (r.phi, -r.index))
    return PhiSearchResult(mu, seed, best, tuple(res), name)


def phi_supremum_estimate(mu: int, restarts: int = 64, seed: int = 0) -> float:
    """Best feasible phi found by :func:`phi_supremum_search`."""
    return phi_supremum_search(mu, restarts, seed).value
