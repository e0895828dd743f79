# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the penalised multi-start ascent for phi.

The parameter vector holds the real parts and then the imaginary parts of
the upper triangle (row major) of a complex symmetric matrix.  The objective
to minimise is ``F = -phi(A) + rho * ||A^mu||^2 / ||A||^(2 mu)``; the phi part
of the gradient comes from central differences, the penalty part is exact.
"""
from libc.stdlib cimport malloc, free
from libc.math cimport sqrt, fabs
from libc.string cimport memcpy, memset

import numpy as np


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef void unpack(const double* x, int mu, double complex* A) noexcept nogil:
    cdef int h = mu * (mu + 1) // 2
    cdef int k = 0
    cdef int i, j
    for i in range(mu):
        for j in range(i, mu):
            A[i * mu + j] = x[k] + x[h + k] * 1j
            A[j * mu + i] = A[i * mu + j]
            k += 1


cdef void matmul(const double complex* X, const double complex* Y, double complex* Z, int n) noexcept nogil:
    cdef int i, j, k
    cdef double complex s
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s = s + X[i * n + k] * Y[k * n + j]
            Z[i * n + j] = s


cdef double phi_raw(const double* x, int mu, double complex* w) noexcept nogil:
    """phi of the symmetric matrix encoded by x (scale invariant)."""
    cdef int n2 = mu * mu
    cdef double complex* A = w
    cdef double complex* C = w + n2
    cdef int i, j, k
    cdef double nrm2 = 0.0, num = 0.0
    cdef double complex s
    unpack(x, mu, A)
    for i in range(n2):
        nrm2 += cabs2(A[i])
    if nrm2 == 0.0:
        return 0.0
    for i in range(mu):
        for j in range(mu):
            s = 0
            for k in range(mu):
                s = s + A[i * mu + k] * A[k * mu + j].conjugate() - A[i * mu + k].conjugate() * A[k * mu + j]
            num += cabs2(s)
    return -num / (nrm2 * nrm2)


cdef double penalty(const double* x, int mu, double* grad, double complex* w) noexcept nogil:
    """g = ||A^mu||^2 / ||A||^(2 mu); exact gradient written to grad if not NULL."""
    cdef int n2 = mu * mu
    cdef int h = mu * (mu + 1) // 2
    cdef double complex* A = w
    cdef double complex* P = w + n2              # powers A^0..A^mu, (mu+1) blocks
    cdef double complex* G = P + (mu + 1) * n2
    cdef double complex* T1 = G + n2
    cdef double complex* T2 = T1 + n2
    cdef int i, j, k, kk
    cdef double nrm2 = 0.0, pm = 0.0, g, scale
    unpack(x, mu, A)
    for i in range(n2):
        nrm2 += cabs2(A[i])
    memset(P, 0, n2 * sizeof(double complex))
    for i in range(mu):
        P[i * mu + i] = 1.0
    for k in range(1, mu + 1):
        matmul(P + (k - 1) * n2, A, P + k * n2, mu)
    for i in range(n2):
        pm += cabs2(P[mu * n2 + i])
    scale = 1.0
    for k in range(mu):
        scale *= nrm2
    g = pm / scale
    if grad == NULL:
        return g
    # G = sum_k (A^k)^H A^mu (A^(mu-1-k))^H
    memset(G, 0, n2 * sizeof(double complex))
    for k in range(mu):
        # T1 = (A^k)^H A^mu
        for i in range(mu):
            for j in range(mu):
                T1[i * mu + j] = 0
                for kk in range(mu):
                    T1[i * mu + j] = T1[i * mu + j] + P[k * n2 + kk * mu + i].conjugate() * P[mu * n2 + kk * mu + j]
        # T2 = T1 (A^(mu-1-k))^H
        for i in range(mu):
            for j in range(mu):
                T2[i * mu + j] = 0
                for kk in range(mu):
                    T2[i * mu + j] = T2[i * mu + j] + T1[i * mu + kk] * P[(mu - 1 - k) * n2 + j * mu + kk].conjugate()
        for i in range(n2):
            G[i] = G[i] + T2[i]
    # W = G / scale - mu g A / nrm2
    for i in range(n2):
        G[i] = G[i] / scale - mu * g * A[i] / nrm2
    k = 0
    for i in range(mu):
        for j in range(i, mu):
            if i == j:
                grad[k] = 2.0 * G[i * mu + i].real
                grad[h + k] = 2.0 * G[i * mu + i].imag
            else:
                grad[k] = 2.0 * (G[i * mu + j].real + G[j * mu + i].real)
                grad[h + k] = 2.0 * (G[i * mu + j].imag + G[j * mu + i].imag)
            k += 1
    return g


cdef double objective(double* x, int mu, int m, double rho, double fd, double* grad,
                      double* tmp, double complex* w) noexcept nogil:
    """F = -phi + rho g with gradient."""
    cdef int i
    cdef double xi, fp, fm, f
    f = -phi_raw(x, mu, w) + rho * penalty(x, mu, tmp, w)
    for i in range(m):
        grad[i] = rho * tmp[i]
    for i in range(m):
        xi = x[i]
        x[i] = xi + fd
        fp = phi_raw(x, mu, w)
        x[i] = xi - fd
        fm = phi_raw(x, mu, w)
        x[i] = xi
        grad[i] -= (fp - fm) / (2.0 * fd)
    return f


cdef double frob(const double* x, int mu, double complex* w) noexcept nogil:
    cdef int i
    cdef double s = 0.0
    unpack(x, mu, w)
    for i in range(mu * mu):
        s += cabs2(w[i])
    return sqrt(s)


cdef void normalise(double* x, int m, int mu, double complex* w) noexcept nogil:
    cdef double nrm = frob(x, mu, w)
    cdef int i
    if nrm > 0:
        for i in range(m):
            x[i] /= nrm


cdef int bfgs_stage(double* x, int mu, int m, double rho, double fd, double* H, int* have_h,
                    int maxiter, double gtol, double complex* w, double* buf) noexcept nogil:
    """Quasi-Newton descent on F for fixed rho; H is the inverse Hessian (kept across stages)."""
    cdef double* g = buf
    cdef double* gn = buf + m
    cdef double* d = buf + 2 * m
    cdef double* xn = buf + 3 * m
    cdef double* s = buf + 4 * m
    cdef double* y = buf + 5 * m
    cdef double* tmp = buf + 6 * m
    cdef double* Hy = buf + 7 * m
    cdef double f, fn, slope, t, sy, yHy, gmax, c
    cdef int it, i, j, ls, stall = 0, reset
    f = objective(x, mu, m, rho, fd, g, tmp, w)
    for it in range(maxiter):
        gmax = 0.0
        for i in range(m):
            if fabs(g[i]) > gmax:
                gmax = fabs(g[i])
        if gmax <= gtol:
            return it
        reset = 0
        while True:
            for i in range(m):
                d[i] = 0.0
                for j in range(m):
                    d[i] -= H[i * m + j] * g[j]
            slope = 0.0
            for i in range(m):
                slope += d[i] * g[i]
            if slope < 0:
                break
            memset(H, 0, m * m * sizeof(double))
            for i in range(m):
                H[i * m + i] = 1.0
            have_h[0] = 0
            reset += 1
            if reset > 1:
                return it
        t = 1.0
        ls = 0
        while ls < 60:
            for i in range(m):
                xn[i] = x[i] + t * d[i]
            fn = objective(xn, mu, m, rho, fd, gn, tmp, w)
            if fn <= f + 1e-4 * t * slope:
                break
            t *= 0.5
            ls += 1
        if ls == 60:
            if have_h[0]:
                memset(H, 0, m * m * sizeof(double))
                for i in range(m):
                    H[i * m + i] = 1.0
                have_h[0] = 0
                continue
            return it
        sy = 0.0
        for i in range(m):
            s[i] = xn[i] - x[i]
            y[i] = gn[i] - g[i]
            sy += s[i] * y[i]
        if f - fn <= 1e-16 * (fabs(f) + 1e-300):
            stall += 1
        else:
            stall = 0
        memcpy(x, xn, m * sizeof(double))
        memcpy(g, gn, m * sizeof(double))
        f = fn
        if stall >= 3:
            return it
        if sy > 1e-300:
            if not have_h[0]:
                yHy = 0.0
                for i in range(m):
                    yHy += y[i] * y[i]
                c = sy / yHy
                for i in range(m * m):
                    H[i] = 0.0
                for i in range(m):
                    H[i * m + i] = c
                have_h[0] = 1
            for i in range(m):
                Hy[i] = 0.0
                for j in range(m):
                    Hy[i] += H[i * m + j] * y[j]
            yHy = 0.0
            for i in range(m):
                yHy += y[i] * Hy[i]
            c = (sy + yHy) / (sy * sy)
            for i in range(m):
                for j in range(m):
                    H[i * m + j] += c * s[i] * s[j] - (Hy[i] * s[j] + s[i] * Hy[j]) / sy
    return maxiter


def ascend(double[::1] x0, int mu, double rho0=1.0, double rho_max=1e18, double fd=1e-6,
           double feas_tol=1e-10, int maxiter=400, double gtol=1e-10):
    """Run one restart of the penalised ascent.

    Returns
    -------
    tuple
        ``(x, phi, violation, rho, feasible, iterations)``.
    """
    cdef int m = x0.shape[0]
    cdef int n2 = mu * mu
    if m != mu * (mu + 1):
        raise ValueError("parameter length must be mu (mu + 1)")
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] xv = x_arr
    cdef double* x = &xv[0]
    cdef double complex* w = <double complex*> malloc((mu + 6) * n2 * sizeof(double complex))
    cdef double* buf = <double*> malloc(8 * m * sizeof(double))
    cdef double* H = <double*> malloc(m * m * sizeof(double))
    cdef int have_h = 0
    cdef double rho = rho0, viol = 0.0, phi = 0.0
    cdef int feasible = 0, its = 0, i
    if w == NULL or buf == NULL or H == NULL:
        free(w); free(buf); free(H)
        raise MemoryError()
    with nogil:
        memset(H, 0, m * m * sizeof(double))
        for i in range(m):
            H[i * m + i] = 1.0
        normalise(x, m, mu, w)
        while True:
            its += bfgs_stage(x, mu, m, rho, fd, H, &have_h, maxiter, gtol, w, buf)
            normalise(x, m, mu, w)
            viol = sqrt(penalty(x, mu, NULL, w))
            if viol < feas_tol:
                feasible = 1
                break
            if rho >= rho_max:
                break
            rho *= 2.0
        phi = phi_raw(x, mu, w)
    free(w); free(buf); free(H)
    return x_arr, phi, viol, rho, bool(feasible), its


def phi_of(double[::1] x, int mu):
    """phi of an encoded parameter vector (for cross-checks)."""
    cdef double complex* w = <double complex*> malloc(2 * mu * mu * sizeof(double complex))
    cdef double r = phi_raw(&x[0], mu, w)
    free(w)
    return r


def penalty_of(double[::1] x, int mu):
    """Penalty value and exact gradient (for cross-checks)."""
    cdef int m = x.shape[0]
    g = np.zeros(m)
    cdef double[::1] gv = g
    cdef double complex* w = <double complex*> malloc((mu + 6) * mu * mu * sizeof(double complex))
    cdef double r = penalty(&x[0], mu, &gv[0], w)
    free(w)
    return r, g
