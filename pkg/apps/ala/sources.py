"""
Machine-label streams and simulated annotation panels.
"""

import json
import logging
import zlib
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from apps.core.exceptions import ConfigError, MalformedRecordError, ParameterError
from apps.datamodel.types import MultimodalSample
from .types import MACHINE_ANNOTATOR, AnnotationBundle

logger = logging.getLogger(__name__)


def _item_rng(seed: int, item_id: str, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, zlib.crc32(item_id.encode('utf-8'))])


def _noisy_label(rng: np.random.Generator, truth: int, classes: int, accuracy: float) -> int:
    if rng.random() < accuracy:
        return truth
    others = [c for c in range(classes) if c != truth]
    return int(rng.choice(others))


class MachineLabeler(ABC):
    """
    Abstract source of automatic FER labels.
    """

    @abstractmethod
    def label(self, sample: MultimodalSample, granularity: str = 'fine') -> Optional[int]:
        """Class index for the sample, or None when unavailable."""
        pass

    def rate(self, sample: MultimodalSample) -> Optional[Tuple[float, float]]:
        """(valence, arousal) for the sample, or None."""
        return None


class SimulatedMachineLabeler(MachineLabeler):
    """
    Noisy copy of the true FER label.
    """

    def __init__(self, accuracy: Optional[float] = None, seed: int = 0, rating_noise: float = 0.25):
        self.accuracy = settings.ALA_MACHINE_ACCURACY if accuracy is None else accuracy
        if not 0.0 <= self.accuracy <= 1.0:
            raise ParameterError(f"machine accuracy must lie in [0, 1], got {self.accuracy}")
        self.seed = seed
        self.rating_noise = rating_noise

    def label(self, sample, granularity='fine'):
        rng = _item_rng(self.seed, sample.sample_id, 0)
        classes = 7 if granularity == 'fine' else 3
        return _noisy_label(rng, sample.labels.class_index('fer', granularity), classes, self.accuracy)

    def rate(self, sample):
        rng = _item_rng(self.seed, sample.sample_id, 1)
        valence, arousal = sample.labels.valence_arousal('fer')
        noisy = np.clip(np.array([valence, arousal]) + rng.normal(scale=self.rating_noise, size=2), -1.0, 1.0)
        return float(noisy[0]), float(noisy[1])


class FileMachineLabeler(MachineLabeler):
    """
    Labels read from a JSONL file of {"item_id": ..., "label": ..., "valence": ..., "arousal": ...}.
    """

    def __init__(self, path: Optional[str] = None):
        path = path or settings.ALA_MACHINE_LABEL_FILE
        if not path:
            raise ConfigError("ALA_MACHINE_LABEL_FILE is not set")
        self.path = Path(path)
        self.records: Dict[str, dict] = {}
        with self.path.open('r', encoding='utf-8') as handle:
            for line_number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    self.records[str(record['item_id'])] = record
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise MalformedRecordError(line_number, 'item_id', str(exc)) from exc
        logger.info(f"Loaded {len(self.records)} machine labels from {self.path}")

    def label(self, sample, granularity='fine'):
        record = self.records.get(sample.sample_id)
        if record is None or record.get('label') is None:
            return None
        return int(record['label'])

    def rate(self, sample):
        record = self.records.get(sample.sample_id)
        if record is None or record.get('valence') is None or record.get('arousal') is None:
            return None
        return float(record['valence']), float(record['arousal'])


def get_machine_labeler(**kwargs) -> MachineLabeler:
    """
    Factory for the configured machine labeler.
    """
    name = getattr(settings, 'ALA_MACHINE_LABELER', 'simulated').lower()
    labelers = {
        'simulated': SimulatedMachineLabeler,
        'file': FileMachineLabeler,
    }
    if name not in labelers:
        raise ConfigError(f"unknown ALA_MACHINE_LABELER '{name}', expected one of {sorted(labelers)}")
    return labelers[name](**kwargs)


def simulate_bundles(
    samples: Sequence[MultimodalSample],
    n_experts: int = 4,
    expert_accuracy: Sequence[float] = (0.9, 0.85, 0.75, 0.65),
    machine: Optional[MachineLabeler] = None,
    granularity: str = 'fine',
    experts_on_all: bool = False,
    rating_noise: float = 0.15,
    seed: int = 0,
) -> Tuple[List[AnnotationBundle], Dict[str, int]]:
    """
    Build annotation bundles for samples.

    Experts re-annotate only the items whose machine label disagrees with
    the ER label unless experts_on_all is set. Expert i is correct with
    probability expert_accuracy[i] (the last value repeats for larger panels)
    and rates valence/arousal with noise growing as accuracy drops.

    Returns:
        (bundles, item_id -> ER class index)
    """
    if n_experts < 0:
        raise ParameterError(f"n_experts must be >= 0, got {n_experts}")
    machine = machine or SimulatedMachineLabeler(seed=seed)
    classes = 7 if granularity == 'fine' else 3
    accuracies = [expert_accuracy[min(i, len(expert_accuracy) - 1)] for i in range(n_experts)]

    bundles, er_labels = [], {}
    for sample in samples:
        er = sample.labels.class_index('er', granularity)
        fer = sample.labels.class_index('fer', granularity)
        er_labels[sample.sample_id] = er
        machine_label = machine.label(sample, granularity)
        ratings = {}
        machine_rating = machine.rate(sample)
        if machine_rating is not None:
            ratings[MACHINE_ANNOTATOR] = machine_rating

        experts = []
        if experts_on_all or machine_label != er:
            rng = _item_rng(seed, sample.sample_id, 2)
            valence, arousal = sample.labels.valence_arousal('fer')
            for index, accuracy in enumerate(accuracies):
                annotator = f'expert_{index + 1}'
                experts.append((annotator, _noisy_label(rng, fer, classes, accuracy)))
                noise = rating_noise * (1.5 - accuracy)
                rated = np.clip(np.array([valence, arousal]) + rng.normal(scale=noise, size=2), -1.0, 1.0)
                ratings[annotator] = (float(rated[0]), float(rated[1]))

        if machine_label is None and not experts:
            logger.warning(f"Item {sample.sample_id} has no machine label and no experts; skipped")
            continue
        bundles.append(AnnotationBundle(
            item_id=sample.sample_id,
            class_count=classes,
            machine_label=machine_label,
            expert_labels=experts,
            ratings=ratings,
        ))
    return bundles, er_labels
