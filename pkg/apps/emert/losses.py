"""
Adversarial, task and combined losses.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import ConfigError, DimensionError
from apps.datamodel.types import LabelSet
from apps.diffkernel import ops
from apps.diffkernel.tensor import DiffNode, constant
from .config import ModelConfig, granularity_of, is_classification


def adversarial_loss(generic_logits: DiffNode, unique_logits: DiffNode, targets: np.ndarray) -> DiffNode:
    """
    Mean cross-entropy of the discriminator over every F_C and F_P vector.

    Both logits have shape (batch, modalities, classes); targets holds one
    class per (sample, modality) pair in the same row-major order.
    """
    if generic_logits.shape != unique_logits.shape:
        raise DimensionError(
            f"generic logits {generic_logits.shape} and unique logits {unique_logits.shape} differ"
        )
    batch, tokens, classes = generic_logits.shape
    targets = np.asarray(targets, dtype=int).reshape(-1)
    if targets.shape != (batch * tokens,):
        raise DimensionError(f"expected {batch * tokens} discriminator targets, got {targets.shape}")
    logits = ops.concat([
        ops.reshape(generic_logits, (batch * tokens, classes)),
        ops.reshape(unique_logits, (batch * tokens, classes)),
    ], axis=0)
    return ops.cross_entropy(logits, np.concatenate([targets, targets]))


def discriminator_targets(labels: Sequence[LabelSet], cfg: ModelConfig) -> np.ndarray:
    """
    Per-token discriminator targets in (sample, modality) order.

    Modality identity by default; with adversarial_target='emotion' the
    face token carries the FER class and the eye tokens the ER class.
    """
    if cfg.adversarial_target == 'modality':
        return np.tile(np.arange(3), len(labels))
    granularity = 'fine' if cfg.discriminator_classes == 7 else 'coarse'
    rows = [
        (label.class_index('fer', granularity), label.class_index('er', granularity), label.class_index('er', granularity))
        for label in labels
    ]
    return np.asarray(rows, dtype=int).reshape(-1)


def head_targets(labels: Sequence[LabelSet], task: str, view: str) -> np.ndarray:
    """Training targets of one head: class indices or (n, d) regression values."""
    if is_classification(task):
        granularity = granularity_of(task)
        return np.array([label.class_index(view, granularity) for label in labels], dtype=int)
    if task == 'regress_va':
        return np.array([label.valence_arousal(view) for label in labels], dtype=np.float64)
    if view != 'fer':
        raise ConfigError("intensity regression is only defined for the FER view")
    return np.array([[label.fer_intensity] for label in labels], dtype=np.float64)


def task_loss(output: DiffNode, labels: Sequence[LabelSet], task: str, view: str, huber_delta: float) -> DiffNode:
    targets = head_targets(labels, task, view)
    if is_classification(task):
        return ops.cross_entropy(output, targets)
    return ops.huber(output, targets, huber_delta)


def task_losses(prediction, labels: Sequence[LabelSet], cfg: ModelConfig) -> Tuple[Optional[DiffNode], Optional[DiffNode]]:
    """(L_e, L_f); a disabled head contributes None."""
    loss_e = loss_f = None
    if prediction.er_out is not None:
        loss_e = task_loss(prediction.er_out, labels, cfg.er_task, 'er', cfg.huber_delta)
    if prediction.fer_out is not None:
        loss_f = task_loss(prediction.fer_out, labels, cfg.fer_task, 'fer', cfg.huber_delta)
    return loss_e, loss_f


def total_loss(loss_adv, loss_e, loss_f, cfg: ModelConfig) -> DiffNode:
    """alpha_adv * L_adv + beta_task * (L_e + L_f), skipping absent terms."""
    terms: List[DiffNode] = []
    if loss_adv is not None:
        terms.append(ops.scale(loss_adv, cfg.alpha_adv))
    task_terms = [loss for loss in (loss_e, loss_f) if loss is not None]
    if task_terms:
        task_sum = task_terms[0] if len(task_terms) == 1 else ops.add(task_terms[0], task_terms[1])
        terms.append(ops.scale(task_sum, cfg.beta_task))
    if not terms:
        return constant(0.0)
    result = terms[0]
    for term in terms[1:]:
        result = ops.add(result, term)
    return result
