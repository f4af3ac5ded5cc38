"""Agreement-region membership and Monte Carlo mass estimates.

All estimates report a 95% Hoeffding radius ``sqrt(ln(2/0.05) / (2n))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .classes import HypothesisClass, min_flip_counts
from .core import DimensionMismatch, LabeledDataset, as_points, budget_count, make_rng, to_fraction

__all__ = [
    "DisagreementCoefficientEstimate",
    "DistributionSpec",
    "RegionEstimate",
    "ball_agreement_mask",
    "ball_agreement_membership",
    "disagreement_coefficient_estimate",
    "hoeffding_radius",
    "interval_mass_check",
    "logconcave_tail_check",
    "robc_estimate",
]

LOGCONCAVE_KINDS = ("gaussian_isotropic", "uniform_ball")


def hoeffding_radius(n: int, confidence: float = 0.95) -> float:
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class DistributionSpec:
    """Marginal distribution over points.

    ``uniform_ball`` is uniform on the ball of radius ``sqrt(d + 2)``, which has
    identity covariance.  ``empirical`` resamples the rows of ``data``.
    """

    kind: Literal["uniform_interval", "uniform_ball", "gaussian_isotropic", "empirical"]
    d: int = 1
    low: float = 0.0
    high: float = 1.0
    data: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("uniform_interval", "uniform_ball", "gaussian_isotropic", "empirical"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "uniform_interval" and self.d != 1:
            raise DimensionMismatch("uniform_interval is one-dimensional")
        if self.kind == "empirical":
            if self.data is None:
                raise ValueError("empirical distribution needs data")
            data = as_points(self.data)
            object.__setattr__(self, "data", data)
            object.__setattr__(self, "d", data.shape[1])

    @classmethod
    def from_dict(cls, desc: dict) -> "DistributionSpec":
        desc = dict(desc)
        if "data" in desc and desc["data"] is not None:
            desc["data"] = np.asarray(desc["data"], dtype=np.float64)
        return cls(**desc)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "d": self.d}
        if self.kind == "uniform_interval":
            out.update(low=self.low, high=self.high)
        return out

    @property
    def isotropic_logconcave(self) -> bool:
        return self.kind in LOGCONCAVE_KINDS

    def sample(self, n: int, seed) -> np.ndarray:
        rng = make_rng(seed)
        if self.kind == "uniform_interval":
            return rng.uniform(self.low, self.high, size=(n, 1))
        if self.kind == "gaussian_isotropic":
            return rng.standard_normal((n, self.d))
        if self.kind == "uniform_ball":
            g = rng.standard_normal((n, self.d))
            g /= np.linalg.norm(g, axis=1)[:, None]
            rad = rng.random(n) ** (1.0 / self.d) * math.sqrt(self.d + 2.0)
            return g * rad[:, None]
        idx = rng.integers(0, self.data.shape[0], size=n)
        return self.data[idx].copy()


@dataclass(frozen=True)
class RegionEstimate:
    mass_hat: float
    n_samples: int
    confidence_radius: float

    @property
    def ci(self) -> tuple[float, float]:
        return (
            max(0.0, self.mass_hat - self.confidence_radius),
            min(1.0, self.mass_hat + self.confidence_radius),
        )

    def to_dict(self) -> dict:
        return {"mass_hat": self.mass_hat, "ci": list(self.ci), "n": self.n_samples}


@dataclass(frozen=True)
class DisagreementCoefficientEstimate:
    theta_hat: float
    epsilon: float
    r_grid: tuple
    masses: tuple
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat,
            "epsilon": self.epsilon,
            "r_grid": list(self.r_grid),
            "masses": list(self.masses),
            "n": self.n_samples,
        }


def _radius_count(r, m: int) -> int:
    r = to_fraction(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return budget_count(r, m)


def ball_agreement_mask(cls: HypothesisClass, S: LabeledDataset, h_star, r, Q, method="auto"):
    """``x in Agree(B_S(h_star, r))`` for each row of ``Q``.

    True iff every hypothesis within empirical distance ``r`` of ``h_star`` on
    ``S`` agrees with it at ``x``, i.e. flipping ``x`` costs more than
    ``floor(r*m)`` disagreements on ``S``.
    """
    flips = min_flip_counts(cls, S.X, h_star, Q, method=method)
    return flips > _radius_count(r, S.m)


def ball_agreement_membership(cls, S: LabeledDataset, h_star, r, x, method="auto") -> bool:
    return bool(ball_agreement_mask(cls, S, h_star, r, as_points(x, cls.d)[:1], method)[0])


def robc_estimate(
    cls, S: LabeledDataset, h_star, eta, dist: DistributionSpec, n: int, seed, method="auto",
    chunk: int = 4096,
) -> RegionEstimate:
    """Monte Carlo mass of the robustly-reliable region ``Agree(B_S(h*, 2 eta))``.

    The budget is taken on the ``1/m`` grid: the ball radius is
    ``2*floor(eta*m)`` disagreements, which is the exact region of the optimal
    learner against every corruption of ``floor(eta*m)`` positions.
    """
    if dist.d != cls.d:
        raise DimensionMismatch(f"distribution has dimension {dist.d}, class {cls.d}")
    k = budget_count(eta, S.m)
    if k < 0:
        raise ValueError("eta must be nonnegative")
    Q = dist.sample(n, seed)
    hits = 0
    r = Fraction(2 * k, S.m)
    for lo in range(0, n, chunk):
        hits += int(np.count_nonzero(ball_agreement_mask(cls, S, h_star, r, Q[lo : lo + chunk], method)))
    return RegionEstimate(hits / n, n, hoeffding_radius(n))


def default_r_grid(epsilon: float) -> list[float]:
    grid = []
    r = 1.0
    while r > epsilon:
        grid.append(r)
        r /= 2.0
    return grid


def disagreement_coefficient_estimate(
    cls,
    h_star,
    dist: DistributionSpec,
    r_grid: Sequence[float] | None = None,
    n: int = 20000,
    seed=0,
    epsilon: float = 1e-3,
    reference_size: int = 4096,
    method="auto",
) -> DisagreementCoefficientEstimate:
    """``max_r mass(DIS(B(h*, r))) / r`` over grid values ``r > epsilon``.

    Distances to ``h*`` are measured on a fixed reference sample of
    ``reference_size`` points from ``dist``; its size is the approximation knob.
    The default grid is ``{2^-k}`` stopping above both ``epsilon`` and
    ``32 / reference_size``.
    """
    if r_grid is None:
        # radii holding fewer than ~32 reference points are dominated by discreteness
        grid = default_r_grid(max(epsilon, 32.0 / reference_size))
    else:
        grid = [float(r) for r in r_grid]
    if not grid:
        raise ValueError("empty r grid")
    if any(r <= 0 for r in grid):
        raise ValueError("r grid values must be positive")
    usable = [r for r in grid if r > epsilon]
    if not usable:
        raise ValueError("no grid value exceeds epsilon")
    rng = make_rng(seed)
    R = dist.sample(reference_size, rng)
    Q = dist.sample(n, rng)
    flips = min_flip_counts(cls, R, h_star, Q, method=method)
    masses = [float(np.mean(flips <= math.floor(r * reference_size))) for r in usable]
    theta = max(mv / r for mv, r in zip(masses, usable))
    return DisagreementCoefficientEstimate(theta, epsilon, tuple(usable), tuple(masses), n)


def logconcave_tail_check(dist: DistributionSpec, alpha: float, n: int, seed):
    """Empirical ``Pr(||x|| >= alpha*sqrt(d))`` against the bound ``exp(1 - alpha)``.

    Returns ``(empirical, bound, confidence_radius)``.
    """
    if not dist.isotropic_logconcave:
        raise ValueError(f"{dist.kind} is not an isotropic log-concave generator")
    X = dist.sample(n, seed)
    emp = float(np.mean(np.linalg.norm(X, axis=1) >= alpha * math.sqrt(dist.d)))
    return emp, min(1.0, math.exp(1.0 - alpha)), hoeffding_radius(n)


def interval_mass_check(dist: DistributionSpec, w, a: float, b: float, n: int, seed):
    """Empirical ``Pr(<w, x> in [a, b])`` against the density bound ``|b - a|``.

    Returns ``(empirical, bound, confidence_radius)``.
    """
    if not dist.isotropic_logconcave:
        raise ValueError(f"{dist.kind} is not an isotropic log-concave generator")
    w = np.asarray(w, dtype=np.float64)
    w = w / np.linalg.norm(w)
    proj = dist.sample(n, seed) @ w
    emp = float(np.mean((proj >= a) & (proj <= b)))
    return emp, abs(b - a), hoeffding_radius(n)
