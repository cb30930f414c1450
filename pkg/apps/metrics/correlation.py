"""
Pearson, Spearman and Kendall tau-b correlation coefficients.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy import stats

from apps.core.exceptions import DataError, DimensionError, ParameterError, UndefinedStatisticError

logger = logging.getLogger(__name__)

COEFFICIENTS = ('pearson', 'spearman', 'kendall')


def _paired(x, y):
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise DimensionError(f"x has {x.size} values, y has {y.size}")
    if x.size < 2:
        raise ParameterError(f"correlations need at least 2 pairs, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("correlation inputs must be finite")
    return x, y


def _require_variation(name: str, x: np.ndarray, y: np.ndarray) -> None:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedStatisticError(f"{name} correlation is undefined for constant input")


def _bounded(value: float) -> float:
    return float(np.clip(value, -1.0, 1.0))


def pearson(x, y) -> float:
    x, y = _paired(x, y)
    _require_variation('pearson', x, y)
    return _bounded(stats.pearsonr(x, y)[0])


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    x, y = _paired(x, y)
    _require_variation('spearman', x, y)
    return _bounded(stats.pearsonr(stats.rankdata(x), stats.rankdata(y))[0])


def kendall(x, y) -> float:
    """Kendall tau-b, corrected for ties in either argument."""
    x, y = _paired(x, y)
    _require_variation('kendall', x, y)
    return _bounded(stats.kendalltau(x, y, variant='b')[0])


@dataclass
class Correlations:
    pearson: Optional[float]
    spearman: Optional[float]
    kendall: Optional[float]

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in COEFFICIENTS}


def correlations(x, y, strict: bool = True) -> Correlations:
    """
    All three coefficients of paired samples.

    With strict=False an undefined coefficient is reported as None instead
    of raising UndefinedStatisticError.
    """
    functions = {'pearson': pearson, 'spearman': spearman, 'kendall': kendall}
    values = {}
    for name, function in functions.items():
        try:
            values[name] = function(x, y)
        except UndefinedStatisticError:
            if strict:
                raise
            logger.debug(f"{name} correlation undefined; reporting None")
            values[name] = None
    return Correlations(**values)
