"""Localized soft outlier removal by cutting planes.

Find weights ``q`` in ``[0, 1]`` on a working set ``W`` whose average is at
least ``1 - xi`` and whose weighted second moment along every direction
``w`` in ``B(u, r) ∩ B(0, 1)`` is at most ``sigma2``.

The infinite family of moment constraints is handled by an audit set: solve
the linear program over the audited directions, then search for the most
violated direction by projected gradient ascent of ``w^T A(q) w``, add it to
the audit set, and repeat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .._kernels import project_two_balls, quad_ascent
from ..core import RRLError, SolverError, as_points, make_rng

__all__ = [
    "OutlierRemovalInfeasible",
    "OutlierWeights",
    "max_weighted_moment",
    "soft_outlier_removal",
]


class OutlierRemovalInfeasible(RRLError):
    """No admissible weights: the working set has too much mass along ``direction``."""

    def __init__(self, message, direction=None, q=None):
        super().__init__(message)
        self.direction = direction
        self.q = q


@dataclass(frozen=True)
class OutlierWeights:
    q: np.ndarray
    audit: np.ndarray
    max_moment: float
    iterations: int

    @property
    def p(self) -> np.ndarray:
        s = float(self.q.sum())
        if s <= 0:
            return np.full(len(self.q), 1.0 / len(self.q))
        return self.q / s

    @property
    def mean(self) -> float:
        return float(self.q.mean())


def _moment_matrix(W, q):
    return (W * q[:, None]).T @ W / W.shape[0]


def max_weighted_moment(W, q, u, r, seed=0, restarts=16, steps=100):
    """Approximate ``max_w (1/|W|) sum q (w.x)^2`` over ``B(u,r) ∩ B(0,1)``.

    Projected gradient ascent from ``u``, the projected top eigenvector (both
    signs) and ``restarts`` random feasible starts.
    """
    W = np.asarray(W, dtype=np.float64)
    A = _moment_matrix(W, q)
    d = W.shape[1]
    rng = make_rng(seed)
    vals, vecs = np.linalg.eigh(A)
    top = vecs[:, -1]
    starts = [u, top, -top]
    Z = rng.standard_normal((restarts, d))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    rad = rng.random(restarts) ** (1.0 / d) * min(r, 1.0)
    starts.extend(u + Z * rad[:, None])
    best, bw = quad_ascent(A, u, r, np.array(starts), steps)
    return float(best), np.asarray(bw)


def soft_outlier_removal(
    W, u, r: float, xi: float, sigma2: float, tol: float = 0.05, seed=0,
    max_iter: int = 60, restarts: int = 16,
) -> OutlierWeights:
    """Weights satisfying the box, mean and localized-variance constraints.

    Raises :class:`OutlierRemovalInfeasible` when even the largest total weight
    compatible with the audited directions falls below ``(1 - xi)|W|``.
    """
    W = as_points(W)
    n, d = W.shape
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.shape[0] != d:
        raise ValueError("reference vector dimension mismatch")
    if not (r > 0 and xi > 0 and sigma2 > 0):
        raise ValueError("r, xi and sigma2 must be positive")
    u = u / np.linalg.norm(u)
    rng = make_rng(seed)
    q = np.ones(n)
    audit: list[np.ndarray] = []
    limit = sigma2 * (1.0 + tol)
    for it in range(1, max_iter + 1):
        val, w = max_weighted_moment(W, q, u, r, rng, restarts)
        if val <= limit:
            return OutlierWeights(q, np.array(audit).reshape(-1, d), val, it)
        audit.append(w)
        A = np.array(audit)
        G = (W @ A.T) ** 2 / n  # n x k, constraint j: sum_i q_i G_ij <= sigma2
        res = linprog(
            -np.ones(n), A_ub=G.T, b_ub=np.full(len(audit), sigma2), bounds=[(0.0, 1.0)] * n,
            method="highs",
        )
        if res.status != 0:
            raise SolverError(f"linear program failed: {res.message}")
        q = np.clip(res.x, 0.0, 1.0)
        if q.mean() < 1.0 - xi - 1e-9:
            raise OutlierRemovalInfeasible(
                f"mean weight {q.mean():.4f} below 1 - xi = {1 - xi:.4f}", direction=w, q=q
            )
    val, w = max_weighted_moment(W, q, u, r, rng, restarts)
    if val <= limit:
        return OutlierWeights(q, np.array(audit).reshape(-1, d), val, max_iter)
    raise SolverError(f"cutting planes did not converge: moment {val:.4g} > {limit:.4g}")


def random_feasible_directions(u, r, n, seed):
    """Points spread over ``B(u, r) ∩ B(0, 1)`` for constraint audits."""
    rng = make_rng(seed)
    u = np.asarray(u, dtype=np.float64)
    d = len(u)
    Z = rng.standard_normal((n, d))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    rad = rng.random(n) ** (1.0 / d) * r
    P = u + Z * rad[:, None]
    return np.array([project_two_balls(p, u, r) for p in P])
