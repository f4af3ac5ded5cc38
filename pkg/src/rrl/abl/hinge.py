"""Weighted hinge-loss minimization over a ball intersection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._kernels import hinge_descent, hinge_loss
from ..core import SolverError, as_points

__all__ = ["HingeResult", "hinge_minimize", "weighted_hinge"]


@dataclass(frozen=True)
class HingeResult:
    v: np.ndarray
    loss: float
    gap_estimate: float
    converged: bool

    @property
    def w(self) -> np.ndarray:
        n = np.linalg.norm(self.v)
        return self.v / n if n > 0 else self.v


def weighted_hinge(W, y, p, w, tau) -> float:
    """``sum_i p_i max(0, 1 - y_i <w, x_i> / tau)`` with labels in {0, 1}."""
    ypm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    return float(hinge_loss(as_points(W), ypm, np.asarray(p, dtype=np.float64), np.asarray(w, float), tau))


def hinge_minimize(W, y, p, center, r: float, tau: float, kappa: float = 0.05,
                   iters: int = 1500, strict: bool = False) -> HingeResult:
    """Minimize the ``p``-weighted ``tau``-hinge loss over ``B(center, r) ∩ B(0, 1)``.

    Projected subgradient descent with step ``D/(||g|| sqrt(t))``, keeping the
    best iterate.  The gap estimate is the improvement achieved during the
    second half of the run; ``converged`` reports whether it is within
    ``kappa/32``.  With ``strict`` a non-converged run raises
    :class:`SolverError`.
    """
    W = as_points(W)
    center = np.asarray(center, dtype=np.float64).reshape(-1)
    p = np.asarray(p, dtype=np.float64)
    if r <= 0:
        loss = weighted_hinge(W, y, p, center, tau)
        return HingeResult(center.copy(), loss, 0.0, True)
    ypm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    v, best, half = hinge_descent(W, ypm, p, center, float(r), float(tau), int(iters))
    gap = max(0.0, float(half) - float(best))
    converged = gap <= kappa / 32.0
    if strict and not converged:
        raise SolverError(f"hinge minimization did not converge: gap estimate {gap:.3g}")
    return HingeResult(np.asarray(v), float(best), gap, converged)
