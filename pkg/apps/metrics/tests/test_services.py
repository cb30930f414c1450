"""
Tests for classification and regression metrics.
"""

import numpy as np
import pytest

from apps.core.exceptions import DataError, DimensionError, EmptyInputError
from apps.metrics.services import ConfusionMatrix, classification_metrics, regression_metrics


class TestClassificationMetrics:
    def test_perfect_diagonal(self):
        report = classification_metrics(ConfusionMatrix(np.diag([5, 3, 7])))
        assert (report.war, report.uar, report.f1) == (1.0, 1.0, 1.0)

    def test_two_class_fixture(self):
        report = classification_metrics(ConfusionMatrix([[8, 2], [4, 6]]))
        assert report.war == pytest.approx(0.7)
        assert report.uar == pytest.approx(0.7)
        # class 0: P=8/12 R=0.8 F1=8/11; class 1: P=0.75 R=0.6 F1=2/3
        assert report.f1 == pytest.approx((8 / 11 + 2 / 3) / 2, abs=1e-12)
        assert report.f1 == pytest.approx(0.69697, abs=1e-4)

    def test_absent_class_is_left_out_of_uar(self):
        cm = ConfusionMatrix([[3, 1, 0], [0, 0, 0], [1, 0, 5]])
        report = classification_metrics(cm)
        assert report.uar == pytest.approx((3 / 4 + 5 / 6) / 2)

    def test_undefined_precision_contributes_zero_f1(self):
        cm = ConfusionMatrix([[4, 0], [2, 0]])
        report = classification_metrics(cm)
        assert report.f1 == pytest.approx((2 * (4 / 6) * 1.0 / (4 / 6 + 1.0)) / 2)

    def test_war_is_support_weighted_recall(self):
        rng = np.random.default_rng(0)
        cm = ConfusionMatrix(rng.integers(0, 20, size=(7, 7)))
        counts = cm.counts
        recall = np.diag(counts) / counts.sum(axis=1)
        weighted = (recall * counts.sum(axis=1)).sum() / counts.sum()
        assert classification_metrics(cm).war == pytest.approx(weighted, abs=1e-12)

    def test_empty_matrix(self):
        with pytest.raises(EmptyInputError):
            classification_metrics(ConfusionMatrix(np.zeros((3, 3))))

    def test_from_predictions(self):
        cm = ConfusionMatrix.from_predictions([0, 0, 1, 2, 2], [0, 1, 1, 2, 0], classes=3)
        np.testing.assert_array_equal(cm.counts, [[1, 1, 0], [0, 1, 0], [1, 0, 1]])
        assert cm.total == 5

    def test_invalid_matrices(self):
        with pytest.raises(DimensionError):
            ConfusionMatrix(np.zeros((2, 3)))
        with pytest.raises(DataError):
            ConfusionMatrix([[1, -1], [0, 2]])
        with pytest.raises(DataError):
            ConfusionMatrix.from_predictions([0, 3], [0, 1], classes=3)

    def test_report_names_averaging(self):
        payload = classification_metrics(ConfusionMatrix(np.eye(2))).to_dict()
        assert payload['f1_averaging'] == 'macro'


class TestRegressionMetrics:
    def test_exact_predictions(self):
        report = regression_metrics([0.5, -0.2], [0.5, -0.2])
        assert (report.mae, report.mse, report.rmse) == (0.0, 0.0, 0.0)

    def test_unit_errors(self):
        report = regression_metrics([0.0, 0.0], [1.0, -1.0])
        assert (report.mae, report.mse, report.rmse) == (1.0, 1.0, 1.0)

    def test_matches_streaming_recomputation(self):
        rng = np.random.default_rng(7)
        pred, target = rng.normal(size=500), rng.normal(size=500)
        abs_total = sq_total = 0.0
        for p, t in zip(pred, target):
            abs_total += abs(p - t)
            sq_total += (p - t) ** 2
        report = regression_metrics(pred, target)
        assert report.mae == pytest.approx(abs_total / 500, abs=1e-12)
        assert report.mse == pytest.approx(sq_total / 500, abs=1e-12)
        assert report.rmse ** 2 == pytest.approx(report.mse, abs=1e-12)

    def test_two_column_targets(self):
        report = regression_metrics([[0.0, 1.0]], [[1.0, 1.0]])
        assert report.mae == 0.5

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            regression_metrics([1.0, 2.0], [1.0])

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            regression_metrics([], [])
