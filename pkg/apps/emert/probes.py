"""
Probe discriminators measuring how modality-specific F_C and F_P are.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from apps.core.exceptions import ContractError, EmptyInputError
from apps.datamodel.types import MODALITIES, MultimodalSample
from apps.diffkernel import ops
from apps.diffkernel.optim import SGD, OptimizerState
from apps.diffkernel.tensor import backward, constant, no_grad
from .layers import MLP
from .model import EmertModel, make_batch

logger = logging.getLogger(__name__)


@dataclass
class ProbeReport:
    generic_accuracy: float
    unique_accuracy: float
    train_vectors: int
    test_vectors: int

    def to_dict(self) -> Dict[str, float]:
        return {
            'probe_acc_generic': self.generic_accuracy,
            'probe_acc_unique': self.unique_accuracy,
            'train_vectors': self.train_vectors,
            'test_vectors': self.test_vectors,
        }


def extract_features(model: EmertModel, samples: Sequence[MultimodalSample], batch_size: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    """Frozen F_C and F_P of every sample, each (n, 3, S)."""
    if not model.has_extractors:
        raise ContractError("model has no decoupled features to probe")
    generic, unique = [], []
    with no_grad():
        for start in range(0, len(samples), batch_size):
            batch = make_batch(samples[start:start + batch_size], model.config)
            features = model.decouple(model.encode(batch))
            generic.append(features.generic.value)
            unique.append(features.unique.value)
    return np.concatenate(generic), np.concatenate(unique)


def _probe_accuracy(train_x, train_y, test_x, test_y, seed: int, epochs: int, hidden: int, learning_rate: float) -> float:
    rng = np.random.default_rng(seed)
    probe = MLP(rng, train_x.shape[1], hidden, len(MODALITIES))
    batch_size = 32
    steps = int(np.ceil(len(train_x) / batch_size)) * epochs
    optimizer = SGD(probe.named_parameters(), OptimizerState(learning_rate=learning_rate, total_steps=steps))
    for _ in range(epochs):
        order = rng.permutation(len(train_x))
        for start in range(0, len(order), batch_size):
            rows = order[start:start + batch_size]
            backward(ops.cross_entropy(probe(constant(train_x[rows])), train_y[rows]))
            optimizer.step()
    with no_grad():
        predicted = probe(constant(test_x)).value.argmax(axis=1)
    return float(np.mean(predicted == test_y))


def probe_decoupling(
    model: EmertModel,
    samples: Sequence[MultimodalSample],
    seed: int = 0,
    epochs: int = 30,
    hidden: int = 32,
    learning_rate: float = 0.05,
) -> ProbeReport:
    """
    Train fresh modality classifiers on frozen F_C and on frozen F_P and
    report their accuracy on a held-out half of the samples.

    Chance level is 1/3; decoupled features put F_C near chance and F_P
    well above it.
    """
    if len(samples) < 4:
        raise EmptyInputError("probing needs at least 4 samples")
    generic, unique = extract_features(model, samples)
    order = np.random.default_rng([seed, 3]).permutation(len(samples))
    half = len(samples) // 2
    train_rows, test_rows = order[:half], order[half:]
    labels = np.tile(np.arange(len(MODALITIES)), len(samples)).reshape(len(samples), len(MODALITIES))

    def flatten(features, rows):
        return features[rows].reshape(-1, features.shape[-1]), labels[rows].reshape(-1)

    accuracies = []
    for features in (generic, unique):
        train_x, train_y = flatten(features, train_rows)
        test_x, test_y = flatten(features, test_rows)
        accuracies.append(_probe_accuracy(train_x, train_y, test_x, test_y, seed, epochs, hidden, learning_rate))

    report = ProbeReport(
        generic_accuracy=accuracies[0],
        unique_accuracy=accuracies[1],
        train_vectors=len(train_rows) * len(MODALITIES),
        test_vectors=len(test_rows) * len(MODALITIES),
    )
    logger.info(
        f"Probe accuracy: F_C {report.generic_accuracy:.3f}, F_P {report.unique_accuracy:.3f}"
    )
    return report
