"""
Classification and regression metrics.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from apps.core.exceptions import DataError, DimensionError, EmptyInputError, ParameterError

logger = logging.getLogger(__name__)

F1_AVERAGING = 'macro'


@dataclass
class ConfusionMatrix:
    """
    K x K counts; rows are true classes, columns predicted classes.
    """
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DimensionError(f"confusion matrix must be square, got shape {counts.shape}")
        if not np.all(np.equal(np.mod(counts, 1), 0)) or np.any(counts < 0):
            raise DataError("confusion matrix counts must be non-negative integers")
        self.counts = counts.astype(np.int64)

    @classmethod
    def from_predictions(cls, truth: Sequence[int], predicted: Sequence[int], classes: int) -> 'ConfusionMatrix':
        truth = np.asarray(truth, dtype=int)
        predicted = np.asarray(predicted, dtype=int)
        if truth.shape != predicted.shape:
            raise DimensionError(f"truth {truth.shape} and predictions {predicted.shape} differ in length")
        if classes < 1:
            raise ParameterError(f"classes must be >= 1, got {classes}")
        for name, values in (('truth', truth), ('predicted', predicted)):
            if values.size and (values.min() < 0 or values.max() >= classes):
                raise DataError(f"{name} labels must lie in [0, {classes})")
        counts = np.zeros((classes, classes), dtype=np.int64)
        np.add.at(counts, (truth, predicted), 1)
        return cls(counts)

    @property
    def classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_dict(self) -> Dict[str, object]:
        return {'counts': self.counts.tolist(), 'total': self.total}


@dataclass
class ClassificationReport:
    war: float
    uar: float
    f1: float

    def to_dict(self) -> Dict[str, float]:
        return {'war': self.war, 'uar': self.uar, 'f1': self.f1, 'f1_averaging': F1_AVERAGING}


@dataclass
class RegressionReport:
    mae: float
    mse: float
    rmse: float

    def to_dict(self) -> Dict[str, float]:
        return {'mae': self.mae, 'mse': self.mse, 'rmse': self.rmse}


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros(numerator.shape, dtype=np.float64)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def classification_metrics(cm: ConfusionMatrix) -> ClassificationReport:
    """
    WAR, UAR and macro F1 of a confusion matrix.

    UAR averages recall over classes that occur in the truth. A class
    whose precision or recall is undefined contributes an F1 of 0.

    Raises:
        EmptyInputError: if the matrix holds no samples
    """
    if cm.total == 0:
        raise EmptyInputError("confusion matrix is empty")
    counts = cm.counts.astype(np.float64)
    hits = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)

    recall = _safe_ratio(hits, support)
    precision = _safe_ratio(hits, predicted)
    f1 = _safe_ratio(2.0 * precision * recall, precision + recall)

    return ClassificationReport(
        war=float(hits.sum() / counts.sum()),
        uar=float(recall[support > 0].mean()),
        f1=float(f1.mean()),
    )


def regression_metrics(pred, target) -> RegressionReport:
    """
    MAE, MSE and RMSE over all entries of equally shaped predictions and targets.

    Raises:
        DimensionError: if the shapes differ
        EmptyInputError: if there is nothing to compare
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"predictions {pred.shape} and targets {target.shape} differ in shape")
    if pred.size == 0:
        raise EmptyInputError("regression metrics need at least one value")
    error = pred - target
    mse = float(np.mean(error ** 2))
    return RegressionReport(mae=float(np.mean(np.abs(error))), mse=mse, rmse=float(np.sqrt(mse)))
