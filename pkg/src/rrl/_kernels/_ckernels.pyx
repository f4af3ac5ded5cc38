# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the loops in ``_pykernels``; same signatures and results."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def interval_tables(P):
    cdef double[::1] p = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i
    pm_a = np.empty(n)
    sm_a = np.empty(n)
    bp_a = np.empty(n)
    bs_a = np.empty(n)
    cdef double[::1] pm = pm_a, sm = sm_a, bp = bp_a, bs = bs_a
    cdef double cur, best
    cur = INFINITY
    best = -INFINITY
    for i in range(n):
        if p[i] < cur:
            cur = p[i]
        pm[i] = cur
        if p[i] - cur > best:
            best = p[i] - cur
        bp[i] = best
    cur = -INFINITY
    best = -INFINITY
    for i in range(n - 1, -1, -1):
        if p[i] > cur:
            cur = p[i]
        sm[i] = cur
        if cur - p[i] > best:
            best = cur - p[i]
        bs[i] = best
    return pm_a, sm_a, bp_a, bs_a


cdef inline void _proj_ball(double* z, const double* c, double rad, Py_ssize_t d) noexcept nogil:
    cdef double n = 0.0, t
    cdef Py_ssize_t k
    for k in range(d):
        t = z[k] - c[k]
        n += t * t
    n = sqrt(n)
    if n <= rad:
        return
    for k in range(d):
        z[k] = c[k] + (z[k] - c[k]) * (rad / n)


cdef void _dykstra(double* x, const double* u, double r, double* zero, double* p,
                   double* q, double* yv, double* xn, Py_ssize_t d, int iters) noexcept nogil:
    cdef Py_ssize_t k
    cdef int it
    cdef double moved
    for k in range(d):
        p[k] = 0.0
        q[k] = 0.0
    for it in range(iters):
        for k in range(d):
            yv[k] = x[k] + p[k]
        _proj_ball(yv, u, r, d)
        for k in range(d):
            p[k] = x[k] + p[k] - yv[k]
            xn[k] = yv[k] + q[k]
        _proj_ball(xn, zero, 1.0, d)
        moved = 0.0
        for k in range(d):
            q[k] = yv[k] + q[k] - xn[k]
            moved += (xn[k] - x[k]) * (xn[k] - x[k])
            x[k] = xn[k]
        if moved < 1e-26:
            break


def project_two_balls(z, u, double r, int iters=60):
    x_a = np.array(z, dtype=np.float64, copy=True)
    cdef double[::1] x = x_a
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t d = x.shape[0]
    cdef double[::1] work = np.zeros(5 * d)
    _dykstra(&x[0], &uu[0], r, &work[0], &work[d], &work[2 * d], &work[3 * d], &work[4 * d], d, iters)
    return x_a


cdef inline double _quad(const double* A, const double* w, Py_ssize_t d) noexcept nogil:
    cdef double s = 0.0, row
    cdef Py_ssize_t i, j
    for i in range(d):
        row = 0.0
        for j in range(d):
            row += A[i * d + j] * w[j]
        s += w[i] * row
    return s


def quad_ascent(A, u, double r, starts, int steps=100, int proj_iters=60):
    cdef double[:, ::1] AA = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[:, ::1] S = np.ascontiguousarray(np.atleast_2d(starts), dtype=np.float64)
    cdef Py_ssize_t d = uu.shape[0], ns = S.shape[0], s, i, j
    cdef double tr = 0.0
    for i in range(d):
        tr += AA[i, i]
    cdef double step = 1.0 / tr if tr > 0 else 1.0
    cdef double[::1] work = np.zeros(8 * d)
    cdef double* zero = &work[0]
    cdef double* p = &work[d]
    cdef double* q = &work[2 * d]
    cdef double* yv = &work[3 * d]
    cdef double* xn = &work[4 * d]
    cdef double* w = &work[5 * d]
    cdef double* wn = &work[6 * d]
    cdef double* g = &work[7 * d]
    best_a = np.array(uu, copy=True)
    cdef double[::1] best_w = best_a
    cdef double best_val = -INFINITY, val, moved
    cdef int it
    for s in range(ns):
        for i in range(d):
            w[i] = S[s, i]
        _dykstra(w, &uu[0], r, zero, p, q, yv, xn, d, proj_iters)
        val = _quad(&AA[0, 0], w, d)
        for it in range(steps):
            for i in range(d):
                g[i] = 0.0
                for j in range(d):
                    g[i] += AA[i, j] * w[j]
                wn[i] = w[i] + step * 2.0 * g[i]
            _dykstra(wn, &uu[0], r, zero, p, q, yv, xn, d, proj_iters)
            moved = 0.0
            for i in range(d):
                moved += (wn[i] - w[i]) * (wn[i] - w[i])
                w[i] = wn[i]
            val = _quad(&AA[0, 0], w, d)
            if moved < 1e-24:
                break
        if val > best_val:
            best_val = val
            for i in range(d):
                best_w[i] = w[i]
    return best_val, best_a


cdef double _hinge(const double[:, ::1] X, const double[::1] y, const double[::1] p,
                   const double* w, double tau) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, k
    cdef double s = 0.0, dot, m
    for i in range(n):
        dot = 0.0
        for k in range(d):
            dot += X[i, k] * w[k]
        m = 1.0 - y[i] * dot / tau
        if m > 0:
            s += p[i] * m
    return s


def hinge_loss(X, ypm, p, w, double tau):
    cdef double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    return _hinge(np.ascontiguousarray(X, dtype=np.float64),
                  np.ascontiguousarray(ypm, dtype=np.float64),
                  np.ascontiguousarray(p, dtype=np.float64), &ww[0], tau)


def hinge_descent(X, ypm, p, center, double r, double tau, int iters=2000, int proj_iters=60):
    cdef double[:, ::1] XX = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yy = np.ascontiguousarray(ypm, dtype=np.float64)
    cdef double[::1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n = XX.shape[0], d = XX.shape[1], i, k
    cdef double[::1] work = np.zeros(7 * d)
    cdef double* zero = &work[0]
    cdef double* p_ = &work[d]
    cdef double* q = &work[2 * d]
    cdef double* yv = &work[3 * d]
    cdef double* xn = &work[4 * d]
    cdef double* w = &work[5 * d]
    cdef double* g = &work[6 * d]
    for k in range(d):
        w[k] = cc[k]
    _dykstra(w, &cc[0], r, zero, p_, q, yv, xn, d, proj_iters)
    best_a = np.empty(d)
    cdef double[::1] best_w = best_a
    for k in range(d):
        best_w[k] = w[k]
    cdef double best = _hinge(XX, yy, pp, w, tau)
    cdef double half_best = best
    cdef double G = 0.0, nrm, D, gn, eta, dot, val
    for i in range(n):
        nrm = 0.0
        for k in range(d):
            nrm += XX[i, k] * XX[i, k]
        G += pp[i] * sqrt(nrm)
    G /= tau
    D = 2.0 * (r if r < 1.0 else 1.0)
    if G <= 0 or D <= 0:
        return best_a, best, half_best
    cdef int t
    for t in range(iters):
        for k in range(d):
            g[k] = 0.0
        for i in range(n):
            dot = 0.0
            for k in range(d):
                dot += XX[i, k] * w[k]
            if 1.0 - yy[i] * dot / tau > 0:
                for k in range(d):
                    g[k] -= pp[i] * yy[i] * XX[i, k] / tau
        gn = 0.0
        for k in range(d):
            gn += g[k] * g[k]
        gn = sqrt(gn)
        if gn == 0.0:
            break
        eta = D / (gn * sqrt(t + 1.0))
        for k in range(d):
            w[k] = w[k] - eta * g[k]
        _dykstra(w, &cc[0], r, zero, p_, q, yv, xn, d, proj_iters)
        val = _hinge(XX, yy, pp, w, tau)
        if val < best:
            best = val
            for k in range(d):
                best_w[k] = w[k]
        if t + 1 == iters // 2:
            half_best = best
    return best_a, best, half_best
