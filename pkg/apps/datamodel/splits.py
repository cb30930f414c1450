"""
K-fold cross-validation splits.
"""

import logging
from collections import defaultdict
from typing import Dict, List, Sequence

import numpy as np

from apps.core.exceptions import ParameterError
from .types import DatasetSplit, MultimodalSample

logger = logging.getLogger(__name__)


def kfold_split(samples: Sequence[MultimodalSample], k: int = 5, seed: int = 0) -> DatasetSplit:
    """
    Assign every sample to one of k folds.

    Samples are stratified by er_fine when every occurring class has at
    least k members. Shuffled ids are dealt round-robin, so fold sizes
    never differ by more than one.

    Raises:
        ParameterError: if k < 2 or k exceeds the number of samples
    """
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    if k > len(samples):
        raise ParameterError(f"k={k} exceeds the number of samples ({len(samples)})")

    ordered = sorted(samples, key=lambda s: s.sample_id)
    by_class: Dict[str, List[str]] = defaultdict(list)
    for sample in ordered:
        by_class[sample.labels.er_fine].append(sample.sample_id)

    rng = np.random.default_rng(seed)
    stratified = all(len(ids) >= k for ids in by_class.values())
    if stratified:
        dealt: List[str] = []
        for label in sorted(by_class):
            ids = by_class[label]
            dealt.extend(ids[i] for i in rng.permutation(len(ids)))
    else:
        logger.warning(
            f"Some er_fine class has fewer than {k} members; falling back to an unstratified split"
        )
        dealt = [ordered[i].sample_id for i in rng.permutation(len(ordered))]

    assignments = {sample_id: position % k for position, sample_id in enumerate(dealt)}
    return DatasetSplit(fold_count=k, assignments=assignments, stratified=stratified)
