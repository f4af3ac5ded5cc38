"""Iterative localization: clean the band, minimize hinge loss, shrink the band."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import LabeledDataset, PoolExhausted, derive_seed
from .hinge import hinge_minimize
from .outlier import soft_outlier_removal
from .schedule import AblSchedule

__all__ = ["AblResult", "RoundLog", "abl_learn", "angle", "gaussian_error", "initial_direction"]

log = logging.getLogger(__name__)


def angle(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    c = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(max(-1.0, min(1.0, c)))


def gaussian_error(w, w_star) -> float:
    """Disagreement mass of two homogeneous halfspaces under an isotropic Gaussian."""
    return angle(w, w_star) / math.pi


def initial_direction(X, y) -> np.ndarray:
    """Label-weighted mean ``sum (2y - 1) x``, normalized."""
    v = ((2.0 * np.asarray(y, dtype=np.float64) - 1.0)[:, None] * X).sum(axis=0)
    n = np.linalg.norm(v)
    if n == 0:
        v = np.zeros(X.shape[1])
        v[0] = 1.0
        return v
    return v / n


@dataclass(frozen=True)
class RoundLog:
    k: int
    n_points: int
    band: float
    radius: float
    tau: float
    sigma2: float
    q_mean: float
    audits: int
    hinge_loss: float
    hinge_gap: float
    converged: bool


@dataclass(frozen=True)
class AblResult:
    w: np.ndarray
    schedule: AblSchedule
    rounds: list = field(default_factory=list)
    points_scanned: int = 0

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.rounds)


def abl_learn(S: LabeledDataset, epsilon: float | None = None, delta: float = 0.1,
              schedule: AblSchedule | None = None, seed: int = 0) -> AblResult:
    """Learn a homogeneous halfspace from the pool ``S`` under malicious noise.

    Round 1 works on the first ``n_1`` pool points.  Round ``k`` then scans the
    unused part of the pool, in order, for the next ``n_{k+1}`` points inside
    the band ``|<w_k, x>| < b_k``; running out raises :class:`PoolExhausted`.
    ``delta`` only enters through the calibrated sample sizes.
    """
    if schedule is None:
        from .schedule import load_profile

        schedule = load_profile(S.d, epsilon if epsilon is not None else 0.05)
    elif epsilon is not None:
        schedule = schedule.with_(rounds=AblSchedule.rounds_for(epsilon))
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    X, y = S.X, S.y
    n1 = schedule.sample_size(1)
    if S.m < n1:
        raise PoolExhausted(f"pool has {S.m} points, first round needs {n1}")
    idx = np.arange(n1)
    cursor = n1
    w = (np.asarray(schedule.w0, dtype=np.float64) if schedule.w0 is not None
         else initial_direction(X[idx], y[idx]))
    w = w / np.linalg.norm(w)
    logs = []
    for k in range(1, schedule.rounds + 1):
        W, yW = X[idx], y[idx]
        r, b_prev = schedule.radius(k), schedule.band(k - 1)
        sig2, tau = schedule.sigma2(k), schedule.tau(k)
        ow = soft_outlier_removal(W, w, r, schedule.xi, sig2, tol=schedule.outlier_tol,
                                  seed=derive_seed(seed, k))
        hr = hinge_minimize(W, yW, ow.p, w, r, tau, schedule.kappa, schedule.hinge_iters)
        if not hr.converged:
            log.warning("round %d: hinge gap estimate %.3g above kappa/32", k, hr.hinge_gap
                        if hasattr(hr, "hinge_gap") else hr.gap_estimate)
        w = hr.w
        logs.append(RoundLog(k, len(idx), b_prev, r, tau, sig2, ow.mean, len(ow.audit),
                             hr.loss, hr.gap_estimate, hr.converged))
        log.debug("round %d: |W|=%d q_mean=%.3f audits=%d", k, len(idx), ow.mean, len(ow.audit))
        if k == schedule.rounds:
            break
        b = schedule.band(k)
        need = schedule.sample_size(k + 1)
        rest = X[cursor:]
        hits = np.flatnonzero(np.abs(rest @ w) < b)
        if len(hits) < need:
            raise PoolExhausted(
                f"round {k}: found {len(hits)} of {need} points with |<w, x>| < {b:.4g}"
            )
        idx = cursor + hits[:need]
        cursor = int(idx[-1]) + 1
    return AblResult(w, schedule, logs, cursor)
