"""
Cronbach's alpha and annotation-approach consistency.
"""

import logging
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import DataError, ParameterError, UndefinedStatisticError
from .types import MACHINE_ANNOTATOR, AnnotationBundle

logger = logging.getLogger(__name__)

APPROACHES = ('machine', 'experts', 'experts+machine', 'ala')
LABEL_TYPES = ('discrete', 'valence', 'arousal')


def cronbach_alpha(ratings) -> float:
    """
    Cronbach's alpha of an items x raters matrix.

    alpha = k / (k - 1) * (1 - sum of rater variances / variance of item sums),
    with n - 1 denominators.

    Raises:
        ParameterError: with fewer than 2 raters or 2 items
        DataError: if a rating is not finite
        UndefinedStatisticError: if the item sums do not vary
    """
    matrix = np.asarray(ratings, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2 or matrix.shape[1] < 2:
        raise ParameterError(f"cronbach_alpha needs at least 2 items and 2 raters, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DataError("ratings must be finite")
    raters = matrix.shape[1]
    total_variance = np.var(matrix.sum(axis=1), ddof=1)
    if total_variance == 0:
        raise UndefinedStatisticError("Cronbach's alpha is undefined when item totals have zero variance")
    rater_variances = np.var(matrix, axis=0, ddof=1)
    return float(raters / (raters - 1) * (1.0 - rater_variances.sum() / total_variance))


def _majority(labels: Sequence[int]) -> int:
    counts = Counter(labels)
    best = max(counts.values())
    return min(label for label, count in counts.items() if count == best)


def _approach_value(
    approach: str,
    bundle: AnnotationBundle,
    experts: List[str],
    fused: Dict[str, int],
    fused_ratings: Dict[str, Tuple[float, float]],
) -> Optional[Tuple[float, float, float]]:
    """(discrete, valence, arousal) one approach assigns to an item, or None."""
    expert_labels = dict(bundle.expert_labels)
    expert_ratings = [bundle.ratings[e] for e in experts if e in bundle.ratings]
    machine_rating = bundle.ratings.get(MACHINE_ANNOTATOR)

    if approach == 'machine':
        if bundle.machine_label is None or machine_rating is None:
            return None
        return float(bundle.machine_label), machine_rating[0], machine_rating[1]
    if approach == 'experts':
        label = _majority([expert_labels[e] for e in experts])
        rated = expert_ratings
    elif approach == 'experts+machine':
        label = _majority([label for _, label in bundle.labels()])
        rated = expert_ratings + ([machine_rating] if machine_rating is not None else [])
    else:
        if bundle.item_id not in fused:
            return None
        label = fused[bundle.item_id]
        rated = [fused_ratings[bundle.item_id]] if bundle.item_id in fused_ratings else []
    if not rated:
        return None
    mean = np.mean(np.asarray(rated, dtype=np.float64), axis=0)
    return float(label), float(mean[0]), float(mean[1])


def annotation_consistency(
    bundles: Sequence[AnnotationBundle],
    fused: Dict[str, int],
    fused_ratings: Optional[Dict[str, Tuple[float, float]]] = None,
) -> List[Dict[str, object]]:
    """
    Cronbach's alpha of four annotation approaches per label type.

    Each approach contributes one column (its label or rating per item)
    next to the individual expert columns; only items every expert
    annotated are used. Undefined values are reported as None.
    """
    fused_ratings = fused_ratings or {}
    experts = sorted({annotator for bundle in bundles for annotator, _ in bundle.expert_labels})
    complete = [
        bundle for bundle in sorted(bundles, key=lambda b: b.item_id)
        if experts and all(e in dict(bundle.expert_labels) for e in experts)
        and all(e in bundle.ratings for e in experts)
    ]

    rows = []
    for approach in APPROACHES:
        values, expert_columns = [], []
        for bundle in complete:
            value = _approach_value(approach, bundle, experts, fused, fused_ratings)
            if value is None:
                continue
            labels = dict(bundle.expert_labels)
            values.append(value)
            expert_columns.append([
                (float(labels[e]), bundle.ratings[e][0], bundle.ratings[e][1]) for e in experts
            ])
        for index, label_type in enumerate(LABEL_TYPES):
            alpha = None
            if len(values) >= 2:
                matrix = np.column_stack([
                    [value[index] for value in values],
                    np.array(expert_columns)[:, :, index],
                ])
                try:
                    alpha = cronbach_alpha(matrix)
                except UndefinedStatisticError:
                    logger.warning(f"Cronbach's alpha undefined for {approach}/{label_type}")
            rows.append({
                'approach': approach,
                'label_type': label_type,
                'items': len(values),
                'cronbach_alpha': alpha,
            })
    return rows
