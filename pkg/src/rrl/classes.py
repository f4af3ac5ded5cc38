"""Hypothesis classes with exact (weighted) ERM and constrained-ERM oracles.

Every class implements two internal primitives on raw arrays:

``_erm(X, y, w)``
    returns ``(h, count)`` with ``count`` the minimal weighted error.
``_constrained_counts(X, y, w, Q)``
    returns arrays ``(c0, c1)``: for each query point ``q`` the minimal
    weighted error among hypotheses with ``h(q) = 0`` (resp. 1), ``inf`` when no
    hypothesis outputs that label at ``q``.

Weights are nonnegative integers, so counts stay exact in float64 for any
realistic sample size.  The public methods wrap these in exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import (
    DimensionMismatch,
    LabeledDataset,
    UnsupportedClass,
    as_points,
    check_label,
)

__all__ = [
    "FiniteClass",
    "FiniteHypothesis",
    "HalfspaceClass",
    "Halfspace",
    "HypothesisClass",
    "Interval",
    "IntervalClass",
    "Threshold",
    "ThresholdClass",
    "class_from_descriptor",
    "hypothesis_from_descriptor",
    "min_flip_counts",
]

INF = float("inf")


# ---------------------------------------------------------------------------
# hypotheses


@dataclass(frozen=True)
class Threshold:
    """``1[x >= t]``, or ``1[x < t]`` when ``reverse``."""

    t: float
    reverse: bool = False

    def predict(self, X) -> np.ndarray:
        x = as_points(X, 1)[:, 0]
        out = x >= self.t
        if self.reverse:
            out = ~out
        return out.astype(np.int8)

    def describe(self) -> dict:
        return {"kind": "threshold", "t": self.t, "reverse": self.reverse}


@dataclass(frozen=True)
class Interval:
    """``1[a <= x <= b]``; ``a > b`` encodes the empty interval."""

    a: float
    b: float

    def predict(self, X) -> np.ndarray:
        x = as_points(X, 1)[:, 0]
        return ((x >= self.a) & (x <= self.b)).astype(np.int8)

    def describe(self) -> dict:
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Halfspace:
    """Homogeneous halfspace ``1[<w, x> >= 0]``.

    A relative tolerance ``tol`` absorbs rounding for normals that are built to
    lie exactly on a point's hyperplane; points at the origin are labeled 1.
    """

    w: tuple
    tol: float = 1e-9

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).reshape(-1)
        n = np.linalg.norm(w)
        if not n > 0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "w", tuple(float(v) for v in w / n))

    @property
    def normal(self) -> np.ndarray:
        return np.asarray(self.w)

    def predict(self, X) -> np.ndarray:
        X = as_points(X, len(self.w))
        return _halfspace_predict(self.normal[None, :], X, self.tol)[0]

    def describe(self) -> dict:
        return {"kind": "halfspace", "w": list(self.w)}


@dataclass(frozen=True)
class FiniteHypothesis:
    index: int
    fn: Callable = field(compare=False, repr=False)

    def predict(self, X) -> np.ndarray:
        return np.asarray(self.fn(X), dtype=np.int8).reshape(-1)

    def describe(self) -> dict:
        return {"kind": "finite", "index": self.index}


def _halfspace_predict(W: np.ndarray, X: np.ndarray, tol: float) -> np.ndarray:
    """Prediction matrix (n_normals, n_points)."""
    dots = W @ X.T
    scale = np.linalg.norm(X, axis=1)[None, :]
    return (dots >= -tol * scale).astype(np.int8)


# ---------------------------------------------------------------------------
# base class


class HypothesisClass:
    """Exact ERM oracle contract shared by all classes."""

    kind = "abstract"
    d: int = 1

    # -- primitives to override ------------------------------------------
    def _erm(self, X, y, w):
        raise NotImplementedError

    def _constrained_counts(self, X, y, w, Q):
        raise NotImplementedError

    def _constrained_erm(self, X, y, w, x, label):
        """Return ``(h, count)`` or ``None``; default goes through the copies reduction."""
        return self._copies_route(X, y, w, x, label)

    # -- public API ------------------------------------------------------
    def evaluate(self, h, X) -> np.ndarray:
        return h.predict(as_points(X, self.d))

    def _data(self, S: LabeledDataset, weights=None):
        if S.d != self.d:
            raise DimensionMismatch(f"class has dimension {self.d}, data has {S.d}")
        w = np.ones(S.m, dtype=np.float64) if weights is None else _check_weights(weights, S.m)
        return S.X, S.y.astype(np.int8), w

    def erm(self, S: LabeledDataset, weights=None):
        """Minimal-error hypothesis and its exact empirical error on ``S``."""
        X, y, w = self._data(S, weights)
        h, count = self._erm(X, y, w)
        return h, Fraction(int(round(count)), int(round(w.sum())))

    def constrained_erm(self, S: LabeledDataset, x, y: int, weights=None):
        """Minimizer among hypotheses with ``h(x) = y``; ``None`` when none exists."""
        X, ys, w = self._data(S, weights)
        x = as_points(x, self.d)[0]
        out = self._constrained_erm(X, ys, w, x, check_label(y))
        if out is None:
            return None
        h, count = out
        return h, Fraction(int(round(count)), int(round(w.sum())))

    def constrained_counts(self, S: LabeledDataset, Q, weights=None):
        """Weighted constrained error counts ``(c0, c1)`` for every row of ``Q``."""
        X, y, w = self._data(S, weights)
        Q = as_points(Q, self.d)
        c0, c1 = self._constrained_counts(X, y, w, Q)
        return np.asarray(c0, dtype=np.float64), np.asarray(c1, dtype=np.float64)

    def constrained_erm_via_copies(self, S: LabeledDataset, x, y: int):
        """Constrained ERM by plain ERM on ``S`` plus ``m + 1`` copies of ``(x, y)``.

        Kept as an independent route to cross-check ``constrained_erm``.
        """
        X, ys, w = self._data(S)
        out = self._copies_route(X, ys, w, as_points(x, self.d)[0], check_label(y))
        if out is None:
            return None
        h, count = out
        return h, Fraction(int(round(count)), S.m)

    def _copies_route(self, X, y, w, x, label):
        big = float(w.sum()) + 1.0
        Xa = np.vstack([X, x[None, :]])
        ya = np.concatenate([y, np.array([label], dtype=np.int8)])
        wa = np.concatenate([w, [big]])
        h, _ = self._erm(Xa, ya, wa)
        if int(h.predict(x[None, :])[0]) != label:
            return None
        count = float(np.sum(w * (h.predict(X) != y)))
        return h, count

    def describe(self) -> dict:
        return {"kind": self.kind}


def _check_weights(weights, m: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != m:
        raise DimensionMismatch("weights length must equal sample size")
    if np.any(w < 0) or np.any(w != np.round(w)):
        raise ValueError("weights must be nonnegative integers")
    if w.sum() <= 0:
        raise ValueError("weights must not all be zero")
    return w


# ---------------------------------------------------------------------------
# thresholds


class ThresholdClass(HypothesisClass):
    """Thresholds ``1[x >= t]`` on the line; ``two_sided`` adds ``1[x < t]``."""

    kind = "threshold"
    d = 1

    def __init__(self, two_sided: bool = False):
        self.two_sided = bool(two_sided)

    def describe(self) -> dict:
        return {"kind": "threshold", "two_sided": self.two_sided}

    @staticmethod
    def _cuts(X, y, w):
        x = X[:, 0]
        order = np.argsort(x, kind="stable")
        s = x[order]
        ys = y[order]
        ws = w[order]
        # err[k]: points s_0..s_{k-1} predicted 0, the rest 1
        ones_before = np.concatenate([[0.0], np.cumsum(ws * (ys == 1))])
        zeros_total = float(np.sum(ws * (ys == 0)))
        zeros_before = np.concatenate([[0.0], np.cumsum(ws * (ys == 0))])
        err = ones_before + (zeros_total - zeros_before)
        m = len(s)
        valid = np.ones(m + 1, dtype=bool)
        if m > 1:
            valid[1:m] = s[:-1] < s[1:]
        err = np.where(valid, err, INF)
        return s, err

    @staticmethod
    def _param(s, k, x=None, label=None):
        m = len(s)
        if label == 1:
            return min(s[k], x) if k < m else float(x)
        if label == 0:
            return float(s[k]) if k < m else float(max(x, s[-1]) + 1.0)
        return float(s[k]) if k < m else float(s[-1] + 1.0)

    def _one_sided_erm(self, X, y, w):
        s, err = self._cuts(X, y, w)
        k = int(np.argmin(err))
        return Threshold(self._param(s, k)), float(err[k])

    def _erm(self, X, y, w):
        h, c = self._one_sided_erm(X, y, w)
        if self.two_sided:
            hr, cr = self._one_sided_erm(X, 1 - y, w)
            if cr < c:
                return Threshold(hr.t, reverse=True), cr
        return h, c

    @classmethod
    def _one_sided_counts(cls, X, y, w, Q):
        s, err = cls._cuts(X, y, w)
        q = Q[:, 0]
        L = np.searchsorted(s, q, side="left")
        R = np.searchsorted(s, q, side="right")
        prefmin = np.minimum.accumulate(err)
        sufmin = np.minimum.accumulate(err[::-1])[::-1]
        return sufmin[R], prefmin[L]

    def _constrained_counts(self, X, y, w, Q):
        c0, c1 = self._one_sided_counts(X, y, w, Q)
        if self.two_sided:
            r1, r0 = self._one_sided_counts(X, 1 - y, w, Q)
            c0, c1 = np.minimum(c0, r0), np.minimum(c1, r1)
        return c0, c1

    def _one_sided_constrained(self, X, y, w, x, label):
        s, err = self._cuts(X, y, w)
        L = int(np.searchsorted(s, x[0], side="left"))
        R = int(np.searchsorted(s, x[0], side="right"))
        if label == 1:
            k = int(np.argmin(err[: L + 1]))
        else:
            k = R + int(np.argmin(err[R:]))
        return self._param(s, k, x[0], label), float(err[k])

    def _constrained_erm(self, X, y, w, x, label):
        t, c = self._one_sided_constrained(X, y, w, x, label)
        best = (Threshold(t), c)
        if self.two_sided:
            tr, cr = self._one_sided_constrained(X, 1 - y, w, x, 1 - label)
            if cr < c:
                best = (Threshold(tr, reverse=True), cr)
        return best


# ---------------------------------------------------------------------------
# intervals


def _best_block(P: np.ndarray, lo: int, hi: int):
    """max of ``P[j] - P[i]`` over ``lo <= i <= j <= hi`` with its arguments."""
    seg = P[lo : hi + 1]
    pm = np.minimum.accumulate(seg)
    j = int(np.argmax(seg - pm))
    i = int(np.argmin(seg[: j + 1]))
    return float(seg[j] - seg[i]), lo + i, lo + j


class IntervalClass(HypothesisClass):
    """Closed intervals ``1[a <= x <= b]`` including the empty interval."""

    kind = "interval"
    d = 1

    @staticmethod
    def _groups(X, y, w):
        x = X[:, 0]
        vals, inv = np.unique(x, return_inverse=True)
        v = np.zeros(len(vals))
        np.add.at(v, inv, np.where(y == 1, w, -w))
        P = np.concatenate([[0.0], np.cumsum(v)])
        ones = float(np.sum(w * (y == 1)))
        return vals, P, ones

    @staticmethod
    def _block_hyp(vals, i, j, x=None):
        if i < j:
            a, b = float(vals[i]), float(vals[j - 1])
            if x is not None:
                a, b = min(a, x), max(b, x)
            return Interval(a, b)
        if x is not None:
            return Interval(float(x), float(x))
        return Interval(1.0, 0.0)

    def _erm(self, X, y, w):
        vals, P, ones = self._groups(X, y, w)
        g, i, j = _best_block(P, 0, len(vals))
        return self._block_hyp(vals, i, j), ones - g

    def _constrained_counts(self, X, y, w, Q):
        from ._kernels import interval_tables

        vals, P, ones = self._groups(X, y, w)
        prefmin, sufmax, bestpre, bestsuf = interval_tables(P)
        q = Q[:, 0]
        L = np.searchsorted(vals, q, side="left")
        R = np.searchsorted(vals, q, side="right")
        g1 = sufmax[R] - prefmin[L]
        g0 = np.maximum(bestpre[L], bestsuf[R])
        return ones - g0, ones - g1

    def _constrained_erm(self, X, y, w, x, label):
        vals, P, ones = self._groups(X, y, w)
        G = len(vals)
        L = int(np.searchsorted(vals, x[0], side="left"))
        R = int(np.searchsorted(vals, x[0], side="right"))
        if label == 1:
            i = int(np.argmin(P[: L + 1]))
            j = R + int(np.argmax(P[R:]))
            return self._block_hyp(vals, i, j, x=float(x[0])), ones - float(P[j] - P[i])
        ga, ia, ja = _best_block(P, 0, L)
        gb, ib, jb = _best_block(P, R, G)
        if gb > ga:
            ga, ia, ja = gb, ib, jb
        if ga <= 0:
            return Interval(1.0, 0.0), ones
        return self._block_hyp(vals, ia, ja), ones - ga


# ---------------------------------------------------------------------------
# finite classes


class FiniteClass(HypothesisClass):
    """An explicit finite list of hypotheses, ERM by enumeration.

    Build from callables mapping an ``(n, d)`` array to labels, or from a
    prediction table over a finite grid with :meth:`from_table`.
    """

    kind = "finite"

    def __init__(self, functions: Sequence[Callable], d: int = 1, table_spec=None):
        if len(functions) == 0:
            raise ValueError("a finite class needs at least one hypothesis")
        self.d = int(d)
        self.hypotheses = [FiniteHypothesis(i, f) for i, f in enumerate(functions)]
        self._table_spec = table_spec

    def __len__(self):
        return len(self.hypotheses)

    @classmethod
    def from_table(cls, grid, table) -> "FiniteClass":
        """Class whose hypothesis ``i`` labels ``grid[j]`` with ``table[i][j]``.

        Evaluating at a point outside the grid raises ``KeyError``.
        """
        grid = as_points(grid)
        table = np.asarray(table, dtype=np.int8)
        if table.ndim != 2 or table.shape[1] != grid.shape[0]:
            raise DimensionMismatch("table must have one column per grid point")
        index = {tuple(row): j for j, row in enumerate(grid)}
        if len(index) != grid.shape[0]:
            raise ValueError("grid points must be distinct")
        d = grid.shape[1]

        def lookup(X):
            X = as_points(X, d)
            return np.fromiter((index[tuple(r)] for r in X), dtype=np.intp, count=X.shape[0])

        fns = [_TableRow(table, i, lookup) for i in range(table.shape[0])]
        obj = cls(fns, d=d, table_spec=(grid, table))
        obj._lookup = lookup
        return obj

    def describe(self) -> dict:
        if self._table_spec is None:
            return {"kind": "finite", "size": len(self)}
        grid, table = self._table_spec
        return {"kind": "finite", "grid": grid.tolist(), "table": table.tolist()}

    def prediction_matrix(self, X) -> np.ndarray:
        X = as_points(X, self.d)
        if self._table_spec is not None:
            return self._table_spec[1][:, self._lookup(X)]
        return np.vstack([h.predict(X) for h in self.hypotheses]).astype(np.int8)

    def _errors(self, X, y, w):
        return (self.prediction_matrix(X) != y[None, :]) @ w

    def _erm(self, X, y, w):
        e = self._errors(X, y, w)
        i = int(np.argmin(e))
        return self.hypotheses[i], float(e[i])

    def _constrained_counts(self, X, y, w, Q):
        e = self._errors(X, y, w)[:, None]
        PQ = self.prediction_matrix(Q)
        c1 = np.where(PQ == 1, e, INF).min(axis=0)
        c0 = np.where(PQ == 0, e, INF).min(axis=0)
        return c0, c1

    def _constrained_erm(self, X, y, w, x, label):
        e = self._errors(X, y, w)
        px = self.prediction_matrix(x[None, :])[:, 0]
        cand = np.where(px == label, e, INF)
        i = int(np.argmin(cand))
        if not np.isfinite(cand[i]):
            return None
        return self.hypotheses[i], float(cand[i])


class _TableRow:
    def __init__(self, table, i, lookup):
        self.table, self.i, self.lookup = table, i, lookup

    def __call__(self, X):
        return self.table[self.i, self.lookup(X)]


# ---------------------------------------------------------------------------
# homogeneous halfspaces


def _unit_rows(A):
    n = np.linalg.norm(A, axis=1)
    return A[n > 0] / n[n > 0, None]


def _dedupe_directions(N, decimals=12):
    """Unique lines through the origin: ``n`` and ``-n`` count once."""
    if len(N) == 0:
        return N
    first = np.argmax(np.abs(N) > 1e-12, axis=1)
    sign = np.sign(N[np.arange(len(N)), first])
    C = N * sign[:, None]
    _, idx = np.unique(np.round(C, decimals), axis=0, return_index=True)
    return C[np.sort(idx)]


def halfspace_candidates(P: np.ndarray) -> np.ndarray:
    """Unit normals meeting every face of the arrangement ``{x_i^perp}`` (d <= 3).

    Any labeling of the points realizable by some homogeneous halfspace is
    realized by one of the returned normals.
    """
    d = P.shape[1]
    if d == 1:
        return np.array([[1.0], [-1.0]])
    N = _dedupe_directions(_unit_rows(P))
    if d == 2:
        if len(N) == 0:
            return np.array([[1.0, 0.0]])
        phi = np.arctan2(N[:, 1], N[:, 0])
        ang = np.concatenate([phi + np.pi / 2, phi - np.pi / 2])
        ang = np.unique(np.round(np.mod(ang, 2 * np.pi), 13))
        nxt = np.concatenate([ang[1:], [ang[0] + 2 * np.pi]])
        mids = (ang + nxt) / 2
        if len(ang) == 1:
            mids = np.array([ang[0] + np.pi])
        allang = np.concatenate([ang, mids])
        return np.stack([np.cos(allang), np.sin(allang)], axis=1)
    if d != 3:
        raise UnsupportedClass("exact halfspace ERM is available only for d <= 3")
    if len(N) == 0:
        return np.array([[1.0, 0.0, 0.0]])
    if len(N) == 1:
        n = N[0]
        a = np.cross(n, np.eye(3)[np.argmin(np.abs(n))])
        a /= np.linalg.norm(a)
        b = np.cross(n, a)
        return np.vstack([n, -n, a, -a, b, -b])
    cands = []
    k = len(N)
    ii, jj = np.triu_indices(k, 1)
    V = np.cross(N[ii], N[jj])
    V /= np.linalg.norm(V, axis=1)[:, None]
    verts = np.vstack([V, -V])
    cands.append(verts)
    for i in range(k):
        n = N[i]
        on = np.abs(verts @ n) < 1e-9
        Vi = verts[on]
        a = np.cross(n, np.eye(3)[np.argmin(np.abs(n))])
        a /= np.linalg.norm(a)
        b = np.cross(n, a)
        ang = np.unique(np.round(np.mod(np.arctan2(Vi @ b, Vi @ a), 2 * np.pi), 12))
        nxt = np.concatenate([ang[1:], [ang[0] + 2 * np.pi]])
        mids = (ang + nxt) / 2
        E = np.cos(mids)[:, None] * a + np.sin(mids)[:, None] * b
        cands.append(E)
        # step off the edge into both adjacent cells
        others = np.abs(E @ np.delete(N, i, axis=0).T)
        others = np.where(others > 1e-9, others, INF)
        eps = 0.5 * np.minimum(others.min(axis=1), 1.0)
        for sgn in (1.0, -1.0):
            C = E + sgn * eps[:, None] * n
            cands.append(C / np.linalg.norm(C, axis=1)[:, None])
    return np.vstack(cands)


class HalfspaceClass(HypothesisClass):
    """Homogeneous halfspaces in R^d; exact ERM oracles for d <= 3 only."""

    kind = "halfspace"

    def __init__(self, d: int, tol: float = 1e-9):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = int(d)
        self.tol = float(tol)

    def describe(self) -> dict:
        return {"kind": "halfspace", "d": self.d}

    @property
    def exact(self) -> bool:
        return self.d <= 3

    def _need_exact(self):
        if not self.exact:
            raise UnsupportedClass(
                f"exact halfspace ERM is not available in d={self.d}; "
                "use the margin-based learner instead"
            )

    def _errors(self, Wn, X, y, w):
        return (_halfspace_predict(Wn, X, self.tol) != y[None, :]) @ w

    def _erm(self, X, y, w):
        self._need_exact()
        Wn = halfspace_candidates(X)
        e = self._errors(Wn, X, y, w)
        i = int(np.argmin(e))
        return Halfspace(tuple(Wn[i]), self.tol), float(e[i])

    def _query_table(self, X, y, w, x):
        Wn = halfspace_candidates(np.vstack([X, x[None, :]]))
        e = self._errors(Wn, X, y, w)
        px = _halfspace_predict(Wn, x[None, :], self.tol)[:, 0]
        return Wn, e, px

    def _constrained_counts(self, X, y, w, Q):
        self._need_exact()
        c0 = np.empty(len(Q))
        c1 = np.empty(len(Q))
        for k, x in enumerate(Q):
            _, e, px = self._query_table(X, y, w, x)
            c0[k] = e[px == 0].min() if np.any(px == 0) else INF
            c1[k] = e[px == 1].min() if np.any(px == 1) else INF
        return c0, c1

    def _constrained_erm(self, X, y, w, x, label):
        self._need_exact()
        Wn, e, px = self._query_table(X, y, w, x)
        cand = np.where(px == label, e, INF)
        i = int(np.argmin(cand))
        if not np.isfinite(cand[i]):
            return None
        return Halfspace(tuple(Wn[i]), self.tol), float(cand[i])

    def rotation_flip_counts(self, w_star, X, Q, chunk: int = 512) -> np.ndarray:
        """Disagreements with ``w_star`` on ``X`` needed to flip each query point.

        The competitor is ``w_star`` rotated within ``span(w_star, q)`` just past
        ``q``'s hyperplane.  This upper-bounds the exact minimum and works in any
        dimension; under rotation-invariant marginals the rotation is the
        distributionally optimal way to flip ``q``.
        """
        ws = np.asarray(w_star, dtype=np.float64)
        ws = ws / np.linalg.norm(ws)
        X = as_points(X, self.d)
        Q = as_points(Q, self.d)
        slack = self.tol * np.linalg.norm(X, axis=1)[:, None]
        before = (X @ ws)[:, None] >= -slack
        qs = Q @ ws
        perp = Q - np.outer(qs, ws)
        pn = np.linalg.norm(perp, axis=1)
        degenerate = pn <= 1e-12 * np.maximum(1.0, np.abs(qs))
        U = np.where(degenerate[:, None], _any_perp(ws)[None, :], perp / np.where(pn > 0, pn, 1.0)[:, None])
        pn = np.where(degenerate, 0.0, pn)
        # rotate toward -u when q is labeled 1, toward +u when labeled 0
        sigma = np.where(qs >= 0, -1.0, 1.0)
        phi = np.arctan2(np.abs(qs), pn) + 1e-9
        Wr = np.cos(phi)[:, None] * ws[None, :] + (sigma * np.sin(phi))[:, None] * U
        out = np.empty(len(Q))
        for lo in range(0, len(Q), chunk):
            after = (X @ Wr[lo : lo + chunk].T) >= -slack
            out[lo : lo + chunk] = np.count_nonzero(before != after, axis=0)
        out[degenerate & (qs == 0)] = INF  # the origin is labeled 1 by every halfspace
        return out


def _any_perp(v):
    e = np.zeros_like(v)
    e[int(np.argmin(np.abs(v)))] = 1.0
    e -= (e @ v) * v
    return e / np.linalg.norm(e)


def min_flip_counts(cls: HypothesisClass, X, h, Q, method: str = "auto") -> np.ndarray:
    """Fewest disagreements with ``h`` on points ``X`` among hypotheses flipping ``h`` at each query.

    ``method="exact"`` uses the constrained-ERM oracle on ``X`` relabeled by
    ``h``.  ``"rotation"`` (halfspaces only) uses the planar-rotation competitor
    and is an upper bound.  ``"auto"`` picks exact whenever the class supports
    it cheaply: always for 1-D and finite classes, and for halfspaces with
    d <= 3 on at most 200 points.
    """
    X = as_points(X, cls.d)
    Q = as_points(Q, cls.d)
    if method == "auto":
        method = "exact"
        if isinstance(cls, HalfspaceClass) and (not cls.exact or len(X) > 200):
            method = "rotation"
    if method == "rotation":
        if not isinstance(cls, HalfspaceClass):
            raise UnsupportedClass("rotation flip counts apply to halfspaces only")
        return cls.rotation_flip_counts(h.normal, X, Q)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    T = LabeledDataset(X, h.predict(X))
    e0, e1 = cls.constrained_counts(T, Q)
    return np.where(h.predict(Q) == 1, e0, e1)


# ---------------------------------------------------------------------------
# descriptors


def class_from_descriptor(desc: dict) -> HypothesisClass:
    """Build a class from ``{"kind": ..., **params}``."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    if kind == "threshold":
        return ThresholdClass(two_sided=bool(desc.pop("two_sided", False)))
    if kind == "interval":
        return IntervalClass()
    if kind == "halfspace":
        return HalfspaceClass(int(desc.pop("d", 2)))
    if kind == "finite":
        if "grid" in desc and "table" in desc:
            return FiniteClass.from_table(desc["grid"], desc["table"])
        if "hypotheses" in desc:
            hs = [hypothesis_from_descriptor(None, h) for h in desc["hypotheses"]]
            d = int(desc.get("d", 1))
            return FiniteClass([h.predict for h in hs], d=d)
        raise ValueError("finite class descriptor needs grid+table or hypotheses")
    raise ValueError(f"unknown class kind {kind!r}")


def hypothesis_from_descriptor(cls: HypothesisClass | None, desc: dict):
    kind = desc.get("kind")
    if kind == "threshold":
        return Threshold(float(desc["t"]), bool(desc.get("reverse", False)))
    if kind == "interval":
        return Interval(float(desc["a"]), float(desc["b"]))
    if kind == "halfspace":
        return Halfspace(tuple(float(v) for v in desc["w"]))
    if kind == "finite":
        if not isinstance(cls, FiniteClass):
            raise ValueError("finite hypothesis needs its finite class")
        return cls.hypotheses[int(desc["index"])]
    raise ValueError(f"unknown hypothesis kind {kind!r}")
