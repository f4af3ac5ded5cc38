"""Robustly-reliable learning under instance-targeted poisoning.

Predictors return ``(label, eta)`` certificates: the label is guaranteed
correct whenever the target lies in the hypothesis class and at most an
``eta`` fraction of the training sample was corrupted.
"""

from .core import (
    BudgetExceeded,
    DimensionMismatch,
    LabeledDataset,
    PoolExhausted,
    PromiseViolation,
    ReliablePrediction,
    RRLError,
    SolverError,
    UnsupportedClass,
    covers,
    empirical_error,
    hamming_distance,
)
from .classes import (
    FiniteClass,
    Halfspace,
    HalfspaceClass,
    Interval,
    IntervalClass,
    Threshold,
    ThresholdClass,
    class_from_descriptor,
)
from .learner import rr_predict, rr_predict_tolerant

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "DimensionMismatch",
    "FiniteClass",
    "Halfspace",
    "HalfspaceClass",
    "Interval",
    "IntervalClass",
    "LabeledDataset",
    "PoolExhausted",
    "PromiseViolation",
    "RRLError",
    "ReliablePrediction",
    "SolverError",
    "Threshold",
    "ThresholdClass",
    "UnsupportedClass",
    "class_from_descriptor",
    "covers",
    "empirical_error",
    "hamming_distance",
    "rr_predict",
    "rr_predict_tolerant",
]
