"""
Annotation bundles and reliability models.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from apps.core.exceptions import DataError, EmptyInputError

MACHINE_ANNOTATOR = 'machine'


@dataclass
class AnnotationBundle:
    """
    All labels collected for one item.

    machine_label is the automatic annotator's class index, expert_labels
    the (annotator_id, class index) pairs of the experts; ratings holds
    optional (valence, arousal) per annotator id.
    """
    item_id: str
    class_count: int
    machine_label: Optional[int] = None
    expert_labels: List[Tuple[str, int]] = field(default_factory=list)
    ratings: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.class_count < 2:
            raise DataError(f"{self.item_id}: class_count must be >= 2, got {self.class_count}")
        self.expert_labels = [(str(annotator), int(label)) for annotator, label in self.expert_labels]
        annotators = [annotator for annotator, _ in self.expert_labels]
        if MACHINE_ANNOTATOR in annotators or len(set(annotators)) != len(annotators):
            raise DataError(f"{self.item_id}: expert annotator ids must be unique and not '{MACHINE_ANNOTATOR}'")
        for annotator, label in self.labels():
            if not 0 <= label < self.class_count:
                raise DataError(
                    f"{self.item_id}: label {label} from '{annotator}' is outside [0, {self.class_count})"
                )
        if not self.labels():
            raise EmptyInputError(f"{self.item_id}: bundle carries no label")

    def labels(self) -> List[Tuple[str, int]]:
        """Every (annotator, label) pair, machine included, sorted by annotator id."""
        pairs = list(self.expert_labels)
        if self.machine_label is not None:
            pairs.append((MACHINE_ANNOTATOR, int(self.machine_label)))
        return sorted(pairs)

    def annotators(self) -> List[str]:
        return [annotator for annotator, _ in self.labels()]

    def to_dict(self) -> Dict[str, object]:
        return {
            'item_id': self.item_id,
            'class_count': self.class_count,
            'machine_label': self.machine_label,
            'expert_labels': [list(pair) for pair in self.expert_labels],
            'ratings': {annotator: list(value) for annotator, value in sorted(self.ratings.items())},
        }


@dataclass
class ReliabilityModel:
    """
    Per-annotator reliabilities estimated by EM.

    posteriors maps item_id to the posterior over the item's true class.
    """
    alpha: Dict[str, float]
    class_prior: np.ndarray
    log_likelihood: float
    iterations: int = 0
    converged: bool = False
    posteriors: Dict[str, np.ndarray] = field(default_factory=dict)
    history: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            'alpha': {annotator: self.alpha[annotator] for annotator in sorted(self.alpha)},
            'class_prior': self.class_prior.tolist(),
            'log_likelihood': self.log_likelihood,
            'iterations': self.iterations,
            'converged': self.converged,
        }
