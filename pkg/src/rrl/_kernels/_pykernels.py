"""Pure-Python/numpy reference implementations of the hot loops.

These define the semantics; the compiled module must agree with them to
floating-point tolerance.
"""

import math

import numpy as np


def interval_tables(P):
    """Scan tables over prefix sums ``P`` (length G+1).

    Returns float arrays of length G+1:
    ``prefmin[L] = min P[:L+1]``, ``sufmax[R] = max P[R:]``,
    ``bestpre[L] = max_{i<=j<=L} P[j]-P[i]``, ``bestsuf[R] = max_{R<=i<=j} P[j]-P[i]``.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    prefmin = np.minimum.accumulate(P)
    sufmax = np.maximum.accumulate(P[::-1])[::-1].copy()
    bestpre = np.maximum.accumulate(P - prefmin)
    bestsuf = np.maximum.accumulate((sufmax - P)[::-1])[::-1].copy()
    return prefmin, sufmax, bestpre, bestsuf


def _proj_ball(z, c, rad):
    diff = z - c
    n = math.sqrt(float(diff @ diff))
    if n <= rad:
        return z.copy()
    return c + diff * (rad / n)


def project_two_balls(z, u, r, iters=60):
    """Dykstra projection onto ``B(u, r) ∩ B(0, 1)``."""
    z = np.asarray(z, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    zero = np.zeros_like(z)
    x = z.copy()
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    for _ in range(iters):
        yv = _proj_ball(x + p, u, r)
        p = x + p - yv
        xn = _proj_ball(yv + q, zero, 1.0)
        q = yv + q - xn
        if float((xn - x) @ (xn - x)) < 1e-26:
            x = xn
            break
        x = xn
    return x


def quad_ascent(A, u, r, starts, steps=100, proj_iters=60):
    """Projected gradient ascent of ``w^T A w`` over ``B(u,r) ∩ B(0,1)``.

    ``A`` is symmetric PSD.  Each row of ``starts`` seeds one run.  Returns the
    best value and the maximizer found.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    tr = float(np.trace(A))
    step = 1.0 / tr if tr > 0 else 1.0
    best_val = -math.inf
    best_w = u.copy()
    for s in np.atleast_2d(starts):
        w = project_two_balls(s, u, r, proj_iters)
        val = float(w @ A @ w)
        for _ in range(steps):
            g = 2.0 * (A @ w)
            wn = project_two_balls(w + step * g, u, r, proj_iters)
            vn = float(wn @ A @ wn)
            moved = float((wn - w) @ (wn - w))
            w, val = wn, vn
            if moved < 1e-24:
                break
        if val > best_val:
            best_val, best_w = val, w.copy()
    return best_val, best_w


def hinge_loss(X, ypm, p, w, tau):
    marg = 1.0 - ypm * (X @ w) / tau
    return float(p @ np.maximum(marg, 0.0))


def hinge_descent(X, ypm, p, center, r, tau, iters=2000, proj_iters=60):
    """Projected subgradient descent on the weighted tau-hinge loss.

    Feasible set ``B(center, r) ∩ B(0, 1)``; ``ypm`` holds labels in {-1, +1}.
    Returns ``(best_w, best_loss, best_loss_first_half)``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    ypm = np.ascontiguousarray(ypm, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    w = project_two_balls(center, center, r, proj_iters)
    best_w = w.copy()
    best = hinge_loss(X, ypm, p, w, tau)
    half_best = best
    G = float(p @ np.sqrt(np.einsum("ij,ij->i", X, X))) / tau
    D = 2.0 * min(r, 1.0)
    if G <= 0 or D <= 0:
        return best_w, best, half_best
    for t in range(iters):
        active = (1.0 - ypm * (X @ w) / tau) > 0
        coef = np.where(active, p * ypm, 0.0)
        g = -(coef @ X) / tau
        gn = math.sqrt(float(g @ g))
        if gn == 0.0:
            break
        eta = D / (gn * math.sqrt(t + 1.0))
        w = project_two_balls(w - eta * g, center, r, proj_iters)
        val = hinge_loss(X, ypm, p, w, tau)
        if val < best:
            best, best_w = val, w.copy()
        if t + 1 == iters // 2:
            half_best = best
    return best_w, best, half_best
