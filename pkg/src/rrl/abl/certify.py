"""Per-point certificates from a learned halfspace: norm cutoff plus margin."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import ReliablePrediction, as_points, to_fraction

__all__ = ["BandCertificate", "abl_certify", "certified_mass", "default_alpha"]


def default_alpha(d: int, eta: float) -> float:
    """``ln(1 / (sqrt(d) * eta))``."""
    return math.log(1.0 / (math.sqrt(d) * float(eta)))


@dataclass(frozen=True)
class BandCertificate:
    """Certifies ``x`` iff ``||x|| < alpha sqrt(d)`` and ``|<w_hat, x>| >= C1 alpha eta sqrt(d)``."""

    w_hat: np.ndarray
    eta: float
    alpha: float
    C1: float

    @property
    def d(self) -> int:
        return len(self.w_hat)

    @property
    def norm_cutoff(self) -> float:
        return self.alpha * math.sqrt(self.d)

    @property
    def margin(self) -> float:
        return self.C1 * self.alpha * float(self.eta) * math.sqrt(self.d)

    def mask(self, X) -> np.ndarray:
        X = as_points(X, self.d)
        return (np.linalg.norm(X, axis=1) < self.norm_cutoff) & (np.abs(X @ self.w_hat) >= self.margin)

    def labels(self, X) -> np.ndarray:
        return (as_points(X, self.d) @ self.w_hat >= 0).astype(np.int8)


def _unit(w):
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    n = np.linalg.norm(w)
    if abs(n - 1.0) > 1e-6:
        raise ValueError("w_hat must have unit length")
    return w / n


def abl_certify(w_hat, eta, alpha, C1, x) -> ReliablePrediction:
    """``(sign label, eta)`` when ``x`` passes the norm and margin tests, else abstain."""
    cert = BandCertificate(_unit(w_hat), float(eta), float(alpha), float(C1))
    x = as_points(x, cert.d)[:1]
    if not cert.mask(x)[0]:
        return ReliablePrediction(None, Fraction(-1))
    return ReliablePrediction(int(cert.labels(x)[0]), to_fraction(eta))


def certified_mass(w_hat, eta, alpha, C1, X) -> float:
    cert = BandCertificate(_unit(w_hat), float(eta), float(alpha), float(C1))
    return float(np.mean(cert.mask(X)))
