"""The optimal robustly-reliable predictor and its tolerant (agnostic) variant.

For a test point ``x`` let ``e_y`` be the smallest number of training mistakes
made by a hypothesis forced to say ``y`` at ``x``.  Corrupting ``k`` positions
moves each ``e_y`` by at most ``k``, so ``argmin_y e_y`` is the target's label
whenever fewer than ``max(e0, e1)`` positions were corrupted.  The reported
level is therefore ``(max(e0, e1) - 1)/m``; with tolerance ``nu`` a further
``floor(nu*m)`` mistakes are conceded to the target.

Levels are exact fractions.  When only one label is achievable at ``x`` the
level is capped at 1, which covers every possible corruption.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .classes import min_flip_counts
from .core import (
    LabeledDataset,
    ReliablePrediction,
    as_points,
    budget_count,
    to_fraction,
)

__all__ = [
    "LowerBound",
    "certificate_counts",
    "empirical_rr_lower_bound",
    "empirical_rr_region_mass",
    "rr_predict",
    "rr_predict_batch",
    "rr_predict_tolerant",
]

log = logging.getLogger(__name__)


def certificate_counts(e0, e1, m: int, n_tol: int = 0):
    """Vectorized certificates from constrained error counts.

    Returns ``(labels, numerators)``: label -1 means abstain, and the level is
    ``numerator / m``.  Abstentions carry numerator -1.
    """
    e0 = np.asarray(e0, dtype=np.float64)
    e1 = np.asarray(e1, dtype=np.float64)
    hi = np.maximum(e0, e1)
    labels = np.where(e0 < e1, 0, 1).astype(np.int64)
    finite_hi = np.where(np.isinf(hi), 0.0, hi)
    num = np.where(np.isinf(hi), m, finite_hi - 1 - n_tol)
    num = num.astype(np.int64)
    abstain = (e0 == e1) | (num < 0)
    labels[abstain] = -1
    num[abstain] = -1
    return labels, num


def _to_prediction(label: int, num: int, m: int) -> ReliablePrediction:
    if label < 0:
        return ReliablePrediction.abstain(m)
    return ReliablePrediction(int(label), Fraction(int(num), m))


def _tolerance_count(nu, m: int) -> int:
    nu = to_fraction(nu)
    if nu < 0 or nu >= 1:
        raise ValueError("tolerance must satisfy 0 <= nu < 1")
    return budget_count(nu, m)


def rr_predict(cls, S: LabeledDataset, x) -> ReliablePrediction:
    """Certified label for ``x`` from the (possibly corrupted) sample ``S``.

    If ``S`` is within Hamming distance ``eta'`` of a sample labeled by some
    target in the class and the returned level is at least ``eta'``, the label
    equals the target's label at ``x``.
    """
    return rr_predict_tolerant(cls, S, x, 0)


def rr_predict_tolerant(cls, S: LabeledDataset, x, nu) -> ReliablePrediction:
    """Tolerant variant: the label agrees with every hypothesis of error <= nu."""
    x = as_points(x, cls.d)[:1]
    return rr_predict_batch(cls, S, x, nu)[0]


def rr_predict_batch(cls, S: LabeledDataset, Q, nu=0) -> list[ReliablePrediction]:
    Q = as_points(Q, cls.d)
    labels, num = rr_certificate_arrays(cls, S, Q, nu)
    return [_to_prediction(l, n, S.m) for l, n in zip(labels, num)]


def rr_certificate_arrays(cls, S: LabeledDataset, Q, nu=0):
    """``(labels, numerators)`` arrays for a batch of test points."""
    n_tol = _tolerance_count(nu, S.m)
    e0, e1 = cls.constrained_counts(S, as_points(Q, cls.d))
    return certificate_counts(e0, e1, S.m, n_tol)


def empirical_rr_region_mass(cls, S: LabeledDataset, eta, test_points) -> float:
    """Fraction of ``test_points`` certified at a level covering budget ``eta``.

    A level covers ``eta`` when it protects against every corruption of
    ``floor(eta*m)`` positions, i.e. its numerator is at least that count.
    """
    Q = as_points(test_points, cls.d)
    if Q.shape[0] == 0:
        raise ValueError("empty test set")
    k = budget_count(eta, S.m)
    if k < 0:
        raise ValueError("eta must be nonnegative")
    labels, num = rr_certificate_arrays(cls, S, Q)
    return float(np.mean((labels >= 0) & (num >= k)))


@dataclass(frozen=True)
class LowerBound:
    """``h_hat = erm(S')`` with the two region lower bounds it certifies.

    ``in_ball(Q)`` tests membership in the agreement region of the empirical
    ball of radius ``4*eta`` around ``h_hat``; ``in_low_error(Q)`` tests the
    agreement region of hypotheses with error at most ``3*eta`` on ``S'``.
    """

    h_hat: object
    error: Fraction
    eta: Fraction
    in_ball: Callable
    in_low_error: Callable

    def __call__(self, Q):
        return self.in_ball(Q)


def empirical_rr_lower_bound(cls, S: LabeledDataset, eta) -> LowerBound:
    """Region lower bounds computable from the corrupted sample alone."""
    eta = to_fraction(eta)
    k = budget_count(eta, S.m)
    h_hat, err = cls.erm(S)
    if err > eta:
        log.warning("erm error %s exceeds eta=%s; the lower bound is not guaranteed", err, eta)

    def in_ball(Q):
        return min_flip_counts(cls, S.X, h_hat, Q) > 4 * k

    def in_low_error(Q):
        e0, e1 = cls.constrained_counts(S, as_points(Q, cls.d))
        # every hypothesis with at most 3k mistakes agrees at q
        return (np.minimum(e0, e1) <= 3 * k) & (np.maximum(e0, e1) > 3 * k)

    return LowerBound(h_hat, err, eta, in_ball, in_low_error)
