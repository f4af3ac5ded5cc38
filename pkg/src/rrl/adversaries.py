"""Instance-targeted corruption strategies.

Nasty attacks rewrite at most ``floor(eta*m)`` chosen positions; malicious
attacks rewrite the positions selected by an i.i.d. Bernoulli mask.  Every
attack is positional and leaves untouched positions byte-identical, so
``hamming_distance`` measures the corruption exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .core import (
    BudgetExceeded,
    DimensionMismatch,
    LabeledDataset,
    as_points,
    budget_count,
    make_rng,
)

__all__ = [
    "AttackSpec",
    "attack_half_relabel",
    "attack_malicious",
    "attack_random_flip",
    "band_points",
    "closest_flipper",
    "draw_filler",
    "draw_mask",
    "targeted_half_relabel",
]


@dataclass(frozen=True)
class AttackSpec:
    family: Literal["nasty", "malicious"]
    strategy: Literal["random_flip", "half_relabel_targeted", "adversarial_labels", "band_stuffing"]
    eta: float
    seed: int = 0
    params: dict = field(default_factory=dict)

    _VALID = {
        "nasty": ("random_flip", "half_relabel_targeted"),
        "malicious": ("random_flip", "adversarial_labels", "band_stuffing"),
    }

    def __post_init__(self):
        if self.family not in self._VALID:
            raise ValueError(f"unknown attack family {self.family!r}")
        if self.strategy not in self._VALID[self.family]:
            raise ValueError(f"strategy {self.strategy!r} is not valid for family {self.family!r}")
        if not 0 <= float(self.eta) <= 1:
            raise ValueError("eta must lie in [0, 1]")


def attack_random_flip(S: LabeledDataset, eta, seed) -> LabeledDataset:
    """Flip the labels of ``floor(eta*m)`` uniformly chosen positions."""
    k = budget_count(eta, S.m)
    if k < 0:
        raise ValueError("eta must be nonnegative")
    rng = make_rng(seed)
    idx = rng.choice(S.m, size=min(k, S.m), replace=False)
    return S.replace(idx, y_new=1 - S.y[idx])


def attack_half_relabel(S: LabeledDataset, h_star, h_prime, eta) -> LabeledDataset:
    """Split the disagreement set of ``h_star`` and ``h_prime`` between the two.

    The first ``ceil(|D|/2)`` disagreement positions keep ``h_star``'s label and
    the rest take ``h_prime``'s.  The result is within budget both of the
    ``h_star``-labeled sample and of the same points labeled by ``h_prime``.
    """
    k = budget_count(eta, S.m)
    ps = h_star.predict(S.X)
    pp = h_prime.predict(S.X)
    delta = np.flatnonzero(ps != pp)
    if len(delta) > 2 * k:
        raise BudgetExceeded(
            f"|disagreement| = {len(delta)} exceeds twice the budget {k} positions"
        )
    keep = (len(delta) + 1) // 2
    labels = np.where(ps != pp, ps, S.y).astype(np.int8)
    labels[delta[keep:]] = pp[delta[keep:]]
    return S.relabel(labels)


def closest_flipper(cls, S: LabeledDataset, h_star, x):
    """Hypothesis flipping ``h_star`` at ``x`` with fewest disagreements on ``S``."""
    x = as_points(x, cls.d)
    T = S.relabel(h_star.predict(S.X))
    out = cls.constrained_erm(T, x[0], 1 - int(h_star.predict(x)[0]))
    return None if out is None else out[0]


def targeted_half_relabel(cls, S: LabeledDataset, h_star, eta, x) -> LabeledDataset:
    """Half-relabel attack aimed at test point ``x``.

    Raises :class:`BudgetExceeded` when no hypothesis flipping ``x`` is within
    twice the budget of ``h_star``.
    """
    hp = closest_flipper(cls, S, h_star, x)
    if hp is None:
        raise BudgetExceeded("no hypothesis in the class disagrees with the target at x")
    return attack_half_relabel(S, h_star, hp, eta)


def draw_mask(m: int, eta, seed) -> np.ndarray:
    """Bernoulli(eta) positions mask."""
    rng = make_rng(seed)
    return (rng.random(m) < float(eta)).astype(np.int8)


def draw_filler(sample: Callable, accept: Callable, seed, max_tries: int = 10000) -> np.ndarray:
    """Rejection-sample one point with ``accept(point)`` true.

    ``sample(rng, n)`` returns ``(n, d)`` candidates; ``accept`` maps such an
    array to booleans, e.g. agreement-region membership.
    """
    rng = make_rng(seed)
    tried = 0
    while tried < max_tries:
        cand = as_points(sample(rng, 64))
        ok = np.asarray(accept(cand), dtype=bool)
        if ok.any():
            return cand[int(np.argmax(ok))]
        tried += 64
    raise RuntimeError("no filler point accepted")


def band_points(n: int, w_star, band: float, seed, offset: float = 0.0, scale: float = 1.0):
    """Points in the slab ``|<w*, x>| < band`` labeled against ``w*``.

    Off-normal coordinates are Gaussian with standard deviation ``scale``; an
    ``offset`` shifts them along one seeded direction orthogonal to ``w*``.
    """
    rng = make_rng(seed)
    w = np.asarray(w_star, dtype=np.float64)
    w = w / np.linalg.norm(w)
    d = len(w)
    Z = rng.standard_normal((n, d)) * scale
    Z -= np.outer(Z @ w, w)
    if offset and d > 1:
        u = rng.standard_normal(d)
        u -= (u @ w) * w
        u /= np.linalg.norm(u)
        Z += offset * u
    t = rng.uniform(-band, band, size=n)
    X = Z + np.outer(t, w)
    y = 1 - (X @ w >= 0).astype(np.int8)
    return X, y


def attack_malicious(
    S: LabeledDataset,
    mask,
    payload: str,
    *,
    seed=0,
    h_star=None,
    h_prime=None,
    filler=None,
    w_star=None,
    band: float = 0.1,
    offset: float = 0.0,
) -> LabeledDataset:
    """Rewrite the masked positions of ``S`` with an adversarial payload.

    ``adversarial_labels``
        for each unmasked point where ``h_prime`` and ``h_star`` disagree, a
        masked position (taken in uniformly random order) receives the point
        with the opposite of its clean label; leftover masked positions get the
        filler point with its ``h_star`` label.  Excess disagreement points are
        dropped when the mask is too small.
    ``band_stuffing``
        every masked position receives a point inside the slab around
        ``w_star`` carrying the wrong label.
    ``random_flip``
        masked positions have their labels flipped.
    """
    v = np.asarray(mask).astype(bool).reshape(-1)
    if v.shape[0] != S.m:
        raise DimensionMismatch(f"mask has length {v.shape[0]}, sample has {S.m}")
    pos = np.flatnonzero(v)
    if len(pos) == 0:
        return S
    rng = make_rng(seed)
    if payload == "random_flip":
        return S.replace(pos, y_new=1 - S.y[pos])
    if payload == "band_stuffing":
        if w_star is None:
            raise ValueError("band_stuffing needs w_star")
        X, y = band_points(len(pos), w_star, band, rng, offset=offset)
        return S.replace(pos, X_new=X, y_new=y)
    if payload == "adversarial_labels":
        if h_star is None or h_prime is None or filler is None:
            raise ValueError("adversarial_labels needs h_star, h_prime and filler")
        filler = as_points(filler, S.d)[0]
        dis = np.flatnonzero((h_star.predict(S.X) != h_prime.predict(S.X)) & ~v)
        order = rng.permutation(pos)
        n_dup = min(len(dis), len(order))
        X = np.tile(filler, (len(order), 1))
        y = np.full(len(order), int(h_star.predict(filler[None, :])[0]), dtype=np.int8)
        X[:n_dup] = S.X[dis[:n_dup]]
        y[:n_dup] = 1 - S.y[dis[:n_dup]]
        return S.replace(order, X_new=X, y_new=y)
    raise ValueError(f"unknown payload {payload!r}")
