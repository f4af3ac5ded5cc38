from fractions import Fraction

import numpy as np
import pytest

from rrl import (
    DimensionMismatch,
    FiniteClass,
    LabeledDataset,
    ReliablePrediction,
    Threshold,
    empirical_error,
    hamming_distance,
)
from rrl.core import as_points, budget_count, covers, derive_seed, make_rng, read_points_csv, to_fraction

S3 = LabeledDataset([[0.1], [0.3], [0.5]], [0, 1, 1])


def const(v):
    return lambda X: np.full(len(X), v, dtype=np.int8)


class TestEmpiricalError:
    def test_all_zero_on_zeros(self):
        h = FiniteClass([const(0)]).hypotheses[0]
        assert empirical_error(h, LabeledDataset(np.zeros((4, 1)), [0] * 4)) == 0

    def test_all_zero_on_ones(self):
        h = FiniteClass([const(0)]).hypotheses[0]
        assert empirical_error(h, LabeledDataset(np.zeros((4, 1)), [1] * 4)) == 1

    def test_threshold_hand_count(self):
        assert empirical_error(Threshold(0.4), S3) == Fraction(1, 3)

    def test_exact_denominator(self):
        S = LabeledDataset(np.arange(6)[:, None] / 6, [1, 0, 0, 0, 0, 0])
        assert empirical_error(Threshold(2.0), S) == Fraction(1, 6)


class TestHamming:
    def test_identity(self):
        assert hamming_distance(S3, S3) == 0

    def test_single_edit(self):
        S = LabeledDataset(np.arange(4)[:, None], [0, 0, 1, 1])
        assert hamming_distance(S, S.replace([2], y_new=[0])) == Fraction(1, 4)

    def test_full_replacement(self):
        S = LabeledDataset(np.arange(4)[:, None], [0, 0, 1, 1])
        T = LabeledDataset(np.arange(4)[:, None] + 10, [0, 0, 1, 1])
        assert hamming_distance(S, T) == 1

    def test_positional(self):
        S = LabeledDataset([[0.0], [1.0]], [0, 1])
        T = LabeledDataset([[1.0], [0.0]], [1, 0])
        assert hamming_distance(S, T) == 1

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hamming_distance(S3, LabeledDataset([[0.0]], [0]))


class TestDataset:
    def test_needs_examples(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((0, 1)), [])

    def test_labels_binary(self):
        with pytest.raises(ValueError):
            LabeledDataset([[0.0]], [2])

    def test_finite_coordinates(self):
        with pytest.raises(ValueError):
            LabeledDataset([[np.nan]], [0])

    def test_read_only(self):
        with pytest.raises(ValueError):
            S3.X[0, 0] = 5.0

    def test_csv_round_trip(self, tmp_path):
        S = LabeledDataset(np.random.default_rng(0).standard_normal((7, 3)), [0, 1, 1, 0, 1, 0, 0])
        p = tmp_path / "s.csv"
        text = S.to_csv(p)
        assert text.splitlines()[0] == "x1,x2,x3,y"
        assert LabeledDataset.from_csv(p) == S
        assert LabeledDataset.from_csv(text) == S

    def test_csv_bad_header(self):
        with pytest.raises(ValueError):
            LabeledDataset.from_csv("a,b\n1,0\n")

    def test_points_csv_ignores_label(self):
        P = read_points_csv("x1,x2,y\n1,2,0\n3,4,1\n")
        assert P.tolist() == [[1, 2], [3, 4]]

    def test_as_points_dimension(self):
        assert as_points([1.0, 2.0, 3.0], 3).shape == (1, 3)
        assert as_points([1.0, 2.0, 3.0]).shape == (3, 1)
        with pytest.raises(DimensionMismatch):
            as_points(np.zeros((2, 2)), 3)


class TestPrediction:
    def test_invariants(self):
        with pytest.raises(ValueError):
            ReliablePrediction(None, Fraction(0))
        with pytest.raises(ValueError):
            ReliablePrediction(1, Fraction(-1, 4))

    def test_abstain_sentinel(self):
        p = ReliablePrediction.abstain(8)
        assert p.abstained and p.eta == Fraction(-1, 8)
        assert not p.certifies(0, 8)

    def test_covers_grid(self):
        # level 3/10 covers every budget whose corruption count is at most 3 of 10
        assert covers(Fraction(3, 10), 0.3, 10)
        assert covers(Fraction(3, 10), 0.39, 10)
        assert not covers(Fraction(3, 10), 0.4, 10)
        assert budget_count(0.25, 10) == 2

    def test_float_conversion_is_decimal(self):
        assert to_fraction(0.1) == Fraction(1, 10)


class TestSeeds:
    def test_reproducible(self):
        assert np.array_equal(make_rng(7).random(5), make_rng(7).random(5))

    def test_derived_distinct(self):
        seeds = {derive_seed(1, i) for i in range(100)}
        assert len(seeds) == 100
        assert derive_seed(1, 3) == derive_seed(1, 3)
        assert derive_seed(1, 3) != derive_seed(2, 3)
