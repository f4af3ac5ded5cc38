"""Label-efficient robustly-reliable learning.

:func:`active_rr_learn` is a disagreement-based learner that keeps every
hypothesis making at most ``floor(eta*m)`` mistakes on the labels it has
queried, and asks for a label only where that version space disagrees.
:func:`dhm_active_learn` is an agnostic disagreement-based learner run on the
corrupted pool as a uniform distribution; :func:`dhm_rr_predict` turns its
output into certificates.

Pool labels are only reachable through :class:`MeteredPool`, which counts
every label read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classes import HypothesisClass, min_flip_counts
from .core import (
    LabeledDataset,
    PromiseViolation,
    ReliablePrediction,
    as_points,
    budget_count,
    make_rng,
    to_fraction,
)

__all__ = [
    "ActivePredictor",
    "LabelBudgetReport",
    "MeteredPool",
    "active_rr_learn",
    "dhm_active_learn",
    "dhm_rr_predict",
    "dhm_threshold",
]


class MeteredPool:
    """Pool of points whose labels are released one query at a time."""

    def __init__(self, X, y):
        S = LabeledDataset(X, y)
        self.X = S.X
        self.__labels = S.y
        self._queried: dict[int, int] = {}

    @classmethod
    def from_dataset(cls, S: LabeledDataset) -> "MeteredPool":
        return cls(S.X, S.y)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def query(self, i: int) -> int:
        """Label of pool position ``i``; repeated reads of one position count once."""
        i = int(i)
        if i not in self._queried:
            self._queried[i] = int(self.__labels[i])
        return self._queried[i]

    @property
    def queries_made(self) -> int:
        return len(self._queried)

    @property
    def queried_indices(self) -> list[int]:
        return sorted(self._queried)


@dataclass(frozen=True)
class LabelBudgetReport:
    queries_made: int
    m: int
    theta_hat: float | None = None
    rounds: int | None = None

    def __post_init__(self):
        if self.queries_made > self.m:
            raise ValueError("more queries than pool points")

    def to_dict(self) -> dict:
        return {
            "queries_made": self.queries_made,
            "m": self.m,
            "theta_hat": self.theta_hat,
            "rounds": self.rounds,
        }


def _feasible_counts(cls: HypothesisClass, X, y, x):
    """Constrained mistake counts on ``(X, y)`` at ``x``; empty sample allowed."""
    x = as_points(x, cls.d)
    if len(X) == 0:
        e0, e1 = cls.constrained_counts(LabeledDataset(x, [0]), x)
        return (0.0 if np.isfinite(e0[0]) else math.inf), (0.0 if np.isfinite(e1[0]) else math.inf)
    e0, e1 = cls.constrained_counts(LabeledDataset(X, y), x)
    return float(e0[0]), float(e1[0])


@dataclass
class ActivePredictor:
    """Version space ``{h : mistakes on queried labels <= budget}`` and its predictions."""

    cls: HypothesisClass
    Xq: np.ndarray
    yq: np.ndarray
    budget: int
    m: int
    trace: list = field(default_factory=list, repr=False)

    @property
    def level(self) -> Fraction:
        return Fraction(self.budget, self.m)

    def counts(self, Q):
        Q = as_points(Q, self.cls.d)
        if len(self.Xq) == 0:
            # every hypothesis has zero mistakes
            out = [_feasible_counts(self.cls, self.Xq, self.yq, q) for q in Q]
            return np.array([o[0] for o in out]), np.array([o[1] for o in out])
        return self.cls.constrained_counts(LabeledDataset(self.Xq, self.yq), Q)

    def in_disagreement(self, Q) -> np.ndarray:
        e0, e1 = self.counts(Q)
        return (e0 <= self.budget) & (e1 <= self.budget)

    def predict(self, x) -> ReliablePrediction:
        return self.predict_batch(as_points(x, self.cls.d)[:1])[0]

    def predict_batch(self, Q) -> list[ReliablePrediction]:
        e0, e1 = self.counts(Q)
        out = []
        for a, b in zip(e0, e1):
            ok0, ok1 = a <= self.budget, b <= self.budget
            if ok0 and not ok1:
                out.append(ReliablePrediction(0, self.level))
            elif ok1 and not ok0:
                out.append(ReliablePrediction(1, self.level))
            else:
                out.append(ReliablePrediction.abstain(self.m))
        return out

    def contains(self, h) -> bool:
        """Whether ``h`` survives: at most ``budget`` mistakes on the queried labels."""
        if len(self.Xq) == 0:
            return True
        return int(np.count_nonzero(h.predict(self.Xq) != self.yq)) <= self.budget


def active_rr_learn(cls: HypothesisClass, pool: MeteredPool, eta):
    """Sequential disagreement-based learner with a mistake budget.

    Points are processed in pool order; a label is queried iff the current
    point lies in the disagreement region of the surviving version space.
    Returns ``(predictor, report)``.  Raises :class:`PromiseViolation` if no
    hypothesis stays within the budget, which means the pool was corrupted
    beyond ``eta``.
    """
    m = len(pool)
    B = budget_count(eta, m)
    if B < 0:
        raise ValueError("eta must be nonnegative")
    Xq: list = []
    yq: list = []
    trace = []
    for t in range(m):
        x = pool.X[t]
        Xa = np.array(Xq).reshape(-1, cls.d)
        ya = np.array(yq, dtype=np.int8)
        e0, e1 = _feasible_counts(cls, Xa, ya, x)
        if e0 > B and e1 > B:
            raise PromiseViolation(f"empty version space before point {t}")
        if e0 <= B and e1 <= B:
            Xq.append(x)
            yq.append(pool.query(t))
            trace.append(t)
    Xa = np.array(Xq).reshape(-1, cls.d)
    ya = np.array(yq, dtype=np.int8)
    if len(Xa):
        _, err = cls.erm(LabeledDataset(Xa, ya))
        if err * len(Xa) > B:
            raise PromiseViolation("every hypothesis exceeds the mistake budget on the queried labels")
    pred = ActivePredictor(cls, Xa, ya, B, m, trace)
    return pred, LabelBudgetReport(pool.queries_made, m, rounds=m)


# ---------------------------------------------------------------------------
# agnostic disagreement-based learner


def dhm_threshold(t: int, vc_dim: int, delta: float, e_a: float, e_b: float, c: float = 1.0):
    """Error-gap threshold after ``t`` draws.

    ``beta^2 + beta*(sqrt(e_a) + sqrt(e_b))`` with
    ``beta = sqrt(c * (vc_dim*ln t + ln(1/delta)) / t)``; ``e_a``, ``e_b`` are the
    two candidates' empirical error rates.
    """
    if t <= 0:
        return math.inf
    beta = math.sqrt(c * (vc_dim * math.log(max(t, 2)) + math.log(1.0 / delta)) / t)
    return beta * beta + beta * (math.sqrt(max(e_a, 0.0)) + math.sqrt(max(e_b, 0.0)))


def _vc_dim(cls: HypothesisClass) -> int:
    return {"threshold": 1, "interval": 2}.get(cls.kind, getattr(cls, "d", 1))


def dhm_stream_length(vc_dim: int, epsilon: float, delta: float, c: float = 1.0) -> int:
    """Number of uniform pool draws used by :func:`dhm_active_learn`."""
    return int(math.ceil(c * (vc_dim * math.log(1.0 / epsilon) + math.log(1.0 / delta)) / epsilon**2))


def dhm_active_learn(
    cls: HypothesisClass,
    pool: MeteredPool,
    eta,
    epsilon: float,
    delta: float,
    seed,
    *,
    n_draws: int | None = None,
    gap_constant: float = 1.0,
    schedule: str = "bernstein",
):
    """Agnostic disagreement-based learning on the pool viewed as a distribution.

    Each round draws a pool position uniformly at random.  The learner keeps
    an inferred set ``U`` (labels it never asked for) and a queried set ``T``.
    For the drawn point it finds the best hypothesis consistent with ``U``
    under each forced label; if one label is impossible or its error on ``T``
    exceeds the other's by more than the threshold, the other label is
    inferred, otherwise the label is queried.

    ``schedule="bernstein"`` uses :func:`dhm_threshold`; ``"plain"`` uses
    ``2*sqrt((d ln t + ln(1/delta))/t)``.  ``eta`` is recorded for reporting
    only; the guarantee is relative to the best hypothesis on the pool.
    Returns ``(h_hat, report)``.
    """
    m = len(pool)
    rng = make_rng(seed)
    vc = _vc_dim(cls)
    n = n_draws if n_draws is not None else dhm_stream_length(vc, epsilon, delta)
    idx = rng.integers(0, m, size=n)
    # multiplicities over pool positions
    u_count: dict[int, int] = {}
    u_label: dict[int, int] = {}
    t_count: dict[int, int] = {}
    t_label: dict[int, int] = {}
    X = pool.X
    for t, i in enumerate(idx, start=1):
        i = int(i)
        if i in t_label:
            t_count[i] += 1
            continue
        if i in u_label:
            u_count[i] += 1
            continue
        keys_u = list(u_label)
        keys_t = list(t_label)
        n_t = sum(t_count.values())
        big = float(n_t + 1)
        pos = keys_u + keys_t
        if pos:
            Xs = X[pos]
            ys = np.array([u_label[k] for k in keys_u] + [t_label[k] for k in keys_t], dtype=np.int8)
            ws = np.array([big * u_count[k] for k in keys_u] + [t_count[k] for k in keys_t], float)
            e0, e1 = cls.constrained_counts(LabeledDataset(Xs, ys), X[i : i + 1], weights=ws)
            e0, e1 = float(e0[0]), float(e1[0])
        else:
            e0, e1 = _feasible_counts(cls, np.empty((0, cls.d)), np.empty(0), X[i])
        # a candidate inconsistent with U carries weight >= big
        ok0, ok1 = e0 < big, e1 < big
        if not ok0 or not ok1:
            if not ok0 and not ok1:
                # U itself unrealizable cannot happen: U labels come from a consistent hypothesis
                raise RuntimeError("inferred labels became inconsistent")
            u_label[i] = 1 if not ok0 else 0
            u_count[i] = 1
            continue
        r0 = e0 / (t - 1) if t > 1 else 0.0
        r1 = e1 / (t - 1) if t > 1 else 0.0
        if schedule == "bernstein":
            gap = dhm_threshold(t - 1, vc, delta, r0, r1, gap_constant)
        elif schedule == "plain":
            gap = 2.0 * math.sqrt((vc * math.log(max(t - 1, 2)) + math.log(1.0 / delta)) / max(t - 1, 1))
        else:
            raise ValueError(f"unknown schedule {schedule!r}")
        if r1 - r0 > gap:
            u_label[i], u_count[i] = 0, 1
        elif r0 - r1 > gap:
            u_label[i], u_count[i] = 1, 1
        else:
            t_label[i] = pool.query(i)
            t_count[i] = 1
    keys_u = list(u_label)
    keys_t = list(t_label)
    n_t = sum(t_count.values())
    big = float(n_t + 1)
    pos = keys_u + keys_t
    ys = np.array([u_label[k] for k in keys_u] + [t_label[k] for k in keys_t], dtype=np.int8)
    ws = np.array([big * u_count[k] for k in keys_u] + [t_count[k] for k in keys_t], float)
    h_hat, _ = cls.erm(LabeledDataset(X[pos], ys), weights=ws)
    return h_hat, LabelBudgetReport(pool.queries_made, m, rounds=n)


def dhm_rr_predict(cls: HypothesisClass, pool_X, h_hat, epsilon, x) -> ReliablePrediction:
    """Certificate from the agreement region of balls around ``h_hat``.

    The level is the largest ``j/m`` such that every hypothesis within
    ``2*j/m + epsilon`` of ``h_hat`` on the pool agrees at ``x``; the label is
    ``h_hat(x)``.  Only the pool points are used, never their labels.
    """
    X = as_points(pool_X, cls.d)
    m = X.shape[0]
    x = as_points(x, cls.d)[:1]
    c = float(min_flip_counts(cls, X, h_hat, x)[0])
    e = budget_count(to_fraction(epsilon), m)
    if math.isinf(c):
        return ReliablePrediction(int(h_hat.predict(x)[0]), Fraction(1))
    j = (int(c) - e - 1) // 2
    if j < 0:
        return ReliablePrediction.abstain(m)
    return ReliablePrediction(int(h_hat.predict(x)[0]), Fraction(min(j, m), m))
