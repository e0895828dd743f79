"""Pure numpy version of the compiled ascent kernel (same algorithm)."""
from __future__ import annotations

import numpy as np


def _unpack(x, mu):
    h = mu * (mu + 1) // 2
    iu = np.triu_indices(mu)
    A = np.zeros((mu, mu), dtype=complex)
    A[iu] = x[:h] + 1j * x[h:]
    A.T[iu] = A[iu]
    return A


def phi_of(x, mu):
    """phi of the symmetric matrix encoded by ``x``."""
    A = _unpack(np.asarray(x, dtype=float), mu)
    nrm2 = float(np.vdot(A, A).real)
    if nrm2 == 0.0:
        return 0.0
    C = A @ A.conj() - A.conj() @ A
    return -float(np.vdot(C, C).real) / nrm2 ** 2


def penalty_of(x, mu, grad=True):
    """``||A^mu||^2 / ||A||^(2 mu)`` and its exact gradient."""
    x = np.asarray(x, dtype=float)
    A = _unpack(x, mu)
    nrm2 = float(np.vdot(A, A).real)
    P = [np.eye(mu, dtype=complex)]
    for _ in range(mu):
        P.append(P[-1] @ A)
    scale = nrm2 ** mu
    g = float(np.vdot(P[mu], P[mu]).real) / scale
    if not grad:
        return g
    G = sum(P[k].conj().T @ P[mu] @ P[mu - 1 - k].conj().T for k in range(mu))
    W = G / scale - mu * g * A / nrm2
    iu = np.triu_indices(mu)
    Ws = W + W.T
    Ws[np.diag_indices(mu)] = np.diag(W)
    out = np.concatenate([2 * Ws[iu].real, 2 * Ws[iu].imag])
    return g, out


def _objective(x, mu, rho, fd):
    pen, pg = penalty_of(x, mu)
    f = -phi_of(x, mu) + rho * pen
    grad = rho * pg
    xx = x.copy()
    for i in range(x.size):
        xi = xx[i]
        xx[i] = xi + fd
        fp = phi_of(xx, mu)
        xx[i] = xi - fd
        fm = phi_of(xx, mu)
        xx[i] = xi
        grad[i] -= (fp - fm) / (2 * fd)
    return f, grad


def _normalise(x, mu):
    nrm = np.linalg.norm(_unpack(x, mu))
    return x / nrm if nrm > 0 else x


def _bfgs_stage(x, mu, rho, fd, state, maxiter, gtol):
    m = x.size
    f, g = _objective(x, mu, rho, fd)
    stall = 0
    it = 0
    while it < maxiter:
        if np.abs(g).max() <= gtol:
            return x, it
        reset = 0
        while True:
            d = -(state["H"] @ g)
            slope = float(d @ g)
            if slope < 0:
                break
            state["H"] = np.eye(m)
            state["have"] = False
            reset += 1
            if reset > 1:
                return x, it
        t = 1.0
        for ls in range(60):
            xn = x + t * d
            fn, gn = _objective(xn, mu, rho, fd)
            if fn <= f + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            if state["have"]:
                state["H"] = np.eye(m)
                state["have"] = False
                it += 1
                continue
            return x, it
        s, y = xn - x, gn - g
        sy = float(s @ y)
        stall = stall + 1 if f - fn <= 1e-16 * (abs(f) + 1e-300) else 0
        x, g, f = xn, gn, fn
        it += 1
        if stall >= 3:
            return x, it - 1
        if sy > 1e-300:
            if not state["have"]:
                state["H"] = np.eye(m) * (sy / float(y @ y))
                state["have"] = True
            H = state["H"]
            Hy = H @ y
            c = (sy + float(y @ Hy)) / sy ** 2
            state["H"] = H + c * np.outer(s, s) - (np.outer(Hy, s) + np.outer(s, Hy)) / sy
    return x, maxiter


def ascend(x0, mu, rho0=1.0, rho_max=1e18, fd=1e-6, feas_tol=1e-10, maxiter=400, gtol=1e-10):
    """Run one restart of the penalised ascent.

    Returns
    -------
    tuple
        ``(x, phi, violation, rho, feasible, iterations)``.
    """
    x = np.array(x0, dtype=float)
    m = x.size
    if m != mu * (mu + 1):
        raise ValueError("parameter length must be mu (mu + 1)")
    state = {"H": np.eye(m), "have": False}
    x = _normalise(x, mu)
    rho, its, feasible = float(rho0), 0, False
    while True:
        x, k = _bfgs_stage(x, mu, rho, fd, state, maxiter, gtol)
        its += k
        x = _normalise(x, mu)
        viol = float(np.sqrt(penalty_of(x, mu, grad=False)))
        if viol < feas_tol:
            feasible = True
            break
        if rho >= rho_max:
            break
        rho *= 2.0
    return x, phi_of(x, mu), viol, rho, feasible, its
