"""Data model shared by every learner: datasets, certificates, errors, seeds.

Empirical errors and reliability levels are exact rationals
(:class:`fractions.Fraction`) with denominator ``m``; floating point is used
only inside continuous optimisation and Monte Carlo estimation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ABSTAIN",
    "BudgetExceeded",
    "DimensionMismatch",
    "LabeledDataset",
    "PoolExhausted",
    "PromiseViolation",
    "ReliablePrediction",
    "RRLError",
    "SolverError",
    "UnsupportedClass",
    "as_points",
    "budget_count",
    "covers",
    "derive_seed",
    "empirical_error",
    "hamming_distance",
    "make_rng",
    "to_fraction",
]


class RRLError(Exception):
    """Base class for library errors."""


class DimensionMismatch(RRLError, ValueError):
    pass


class UnsupportedClass(RRLError):
    """The hypothesis class cannot run the requested oracle (e.g. exact ERM in d > 3)."""


class BudgetExceeded(RRLError):
    pass


class PromiseViolation(RRLError):
    """The corrupted sample is inconsistent with the stated corruption budget."""


class PoolExhausted(RRLError):
    pass


class SolverError(RRLError):
    """A numerical sub-solver failed or could not certify its answer."""


#: Sentinel label for abstentions.
ABSTAIN = None


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through ``repr`` so that ``0.05`` becomes ``1/20`` rather than the
    binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        return Fraction(repr(float(value)))
    return Fraction(str(value))


def budget_count(eta, m: int) -> int:
    """Number of positions a budget ``eta`` lets the adversary touch, ``floor(eta*m)``."""
    eta = to_fraction(eta)
    if eta < 0:
        return -1
    return (eta * m).numerator // (eta * m).denominator


def covers(level, budget, m: int) -> bool:
    """True when a certificate at ``level`` covers every corruption allowed by ``budget``.

    Corruption fractions live on the ``1/m`` grid, so a level covers a budget
    exactly when ``floor(level*m) >= floor(budget*m)``.  Negative levels cover
    nothing.
    """
    level = to_fraction(level)
    if level < 0:
        return False
    return budget_count(level, m) >= budget_count(budget, m)


@dataclass(frozen=True)
class ReliablePrediction:
    """A label with a reliability level, or an abstention.

    ``label`` is 0, 1 or ``None`` (abstain).  ``eta`` is exact; negative values
    carry no guarantee and always come with an abstention.
    """

    label: int | None
    eta: Fraction

    def __post_init__(self):
        if self.eta >= 0 and self.label is None:
            raise ValueError("a nonnegative reliability level needs a label")
        if self.eta < 0 and self.label is not None:
            raise ValueError("negative reliability level must abstain")

    @property
    def abstained(self) -> bool:
        return self.label is None

    @classmethod
    def abstain(cls, m: int) -> "ReliablePrediction":
        return cls(None, Fraction(-1, m))

    def certifies(self, budget, m: int) -> bool:
        return covers(self.eta, budget, m)

    def label_str(self) -> str:
        return "abstain" if self.label is None else str(self.label)


def as_points(X, d: int | None = None) -> np.ndarray:
    """Coerce to a float64 array of shape (n, d); 1-D input is read as n scalars."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if d in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"points must be 2-D, got shape {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise DimensionMismatch(f"expected dimension {d}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


class LabeledDataset:
    """Ordered multiset of (point, label) pairs.

    Order is significant: malicious masks and Hamming distance are positional.
    Instances are treated as immutable; the arrays are flagged read-only.
    """

    __slots__ = ("X", "y")

    def __init__(self, X, y):
        X = as_points(X)
        y = np.asarray(y).astype(np.int8).reshape(-1)
        if X.shape[0] == 0:
            raise ValueError("a dataset needs at least one example")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} points but {y.shape[0]} labels")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        X.setflags(write=False)
        y.setflags(write=False)
        self.X = X
        self.y = y

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.m

    def __iter__(self):
        for i in range(self.m):
            yield self.X[i], int(self.y[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.X.shape == other.X.shape
            and bool(np.array_equal(self.X, other.X))
            and bool(np.array_equal(self.y, other.y))
        )

    def __repr__(self) -> str:
        return f"LabeledDataset(m={self.m}, d={self.d})"

    def replace(self, idx, X_new=None, y_new=None) -> "LabeledDataset":
        """Copy with the examples at positions ``idx`` overwritten."""
        X = self.X.copy()
        y = self.y.copy()
        idx = np.asarray(idx, dtype=np.intp).reshape(-1)
        if X_new is not None:
            X[idx] = as_points(X_new, self.d)
        if y_new is not None:
            y[idx] = np.asarray(y_new, dtype=np.int8).reshape(-1)
        return LabeledDataset(X, y)

    def relabel(self, labels) -> "LabeledDataset":
        return LabeledDataset(self.X, labels)

    def concat(self, other: "LabeledDataset") -> "LabeledDataset":
        if other.d != self.d:
            raise DimensionMismatch("dimension mismatch in concat")
        return LabeledDataset(np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]))

    # CSV: header x1..xd,y, one row per example, row order significant.
    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.d)] + ["y"])
        for row, label in zip(self.X, self.y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text: str | Path) -> "LabeledDataset":
        header, rows = _read_csv_rows(path_or_text)
        if not header or header[-1] != "y":
            raise ValueError("dataset CSV must end with a 'y' column")
        expected = [f"x{i + 1}" for i in range(len(header) - 1)]
        if header[:-1] != expected:
            raise ValueError(f"dataset CSV header must be {','.join(expected + ['y'])}")
        if not rows:
            raise ValueError("dataset CSV has no rows")
        data = np.array([[float(v) for v in r] for r in rows])
        return cls(data[:, :-1], data[:, -1].astype(np.int8))


def _read_csv_rows(path_or_text) -> tuple[list[str], list[list[str]]]:
    if isinstance(path_or_text, Path) or (
        isinstance(path_or_text, str) and "\n" not in path_or_text
    ):
        text = Path(path_or_text).read_text()
    else:
        text = path_or_text
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r]
    if not rows:
        return [], []
    return [h.strip() for h in rows[0]], rows[1:]


def read_points_csv(path_or_text) -> np.ndarray:
    """Read test points; a trailing ``y`` column, if present, is ignored."""
    header, rows = _read_csv_rows(path_or_text)
    if not rows:
        raise ValueError("points CSV has no rows")
    ncol = len(header) - 1 if header and header[-1] == "y" else len(header)
    return as_points(np.array([[float(v) for v in r[:ncol]] for r in rows]), ncol)


def empirical_error(h, S: LabeledDataset) -> Fraction:
    """Fraction of examples in ``S`` that ``h`` mislabels, exact with denominator m."""
    pred = h.predict(S.X)
    return Fraction(int(np.count_nonzero(pred != S.y)), S.m)


def hamming_distance(S: LabeledDataset, T: LabeledDataset) -> Fraction:
    """Positional normalized Hamming distance between two equal-size samples."""
    if S.m != T.m:
        raise DimensionMismatch(f"sizes differ: {S.m} vs {T.m}")
    if S.d != T.d:
        raise DimensionMismatch(f"dimensions differ: {S.d} vs {T.d}")
    differs = np.any(S.X != T.X, axis=1) | (S.y != T.y)
    return Fraction(int(np.count_nonzero(differs)), S.m)


def make_rng(seed) -> np.random.Generator:
    """Seeded generator; every stochastic routine takes one of these or a seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def derive_seed(master: int, counter: int) -> int:
    """Counter-based per-trial seed: SeedSequence(master).spawn-key ``counter``."""
    ss = np.random.SeedSequence(entropy=int(master) & (2**64 - 1), spawn_key=(int(counter),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fractions_to_str(values: Iterable[Fraction]) -> list[str]:
    return [str(v) for v in values]


def check_label(y) -> int:
    y = int(y)
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y}")
    return y


def stack(points: Sequence) -> np.ndarray:
    return np.vstack([as_points(p) for p in points])
