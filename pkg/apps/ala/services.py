"""
Consistency filtering, EM reliability estimation and weighted voting.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.special import logsumexp

from apps.core.exceptions import ContractError, DataError, EmptyInputError
from .types import MACHINE_ANNOTATOR, AnnotationBundle, ReliabilityModel

logger = logging.getLogger(__name__)

ALPHA_EPS = 1e-6
TIE_TOLERANCE = 1e-12


def consistency_filter(
    bundles: Sequence[AnnotationBundle],
    er_labels: Dict[str, int],
) -> Tuple[Dict[str, int], List[str]]:
    """
    Accept machine labels that agree with the ER label; route the rest to experts.

    Items without a machine label are always contested.

    Returns:
        (accepted item_id -> label, sorted contested item ids)
    """
    accepted: Dict[str, int] = {}
    contested: List[str] = []
    for bundle in bundles:
        if bundle.item_id not in er_labels:
            raise DataError(f"no ER label for item '{bundle.item_id}'")
        if bundle.machine_label is not None and bundle.machine_label == er_labels[bundle.item_id]:
            accepted[bundle.item_id] = int(bundle.machine_label)
        else:
            contested.append(bundle.item_id)
    logger.info(f"Consistency filter: {len(accepted)} accepted, {len(contested)} contested")
    return accepted, sorted(contested)


class ReliabilityEstimator:
    """
    EM over single-parameter annotator reliabilities.

    An annotator with reliability a reports the true class with
    probability a and each other class with probability (1 - a) / (K - 1).
    Items and annotators are processed in sorted order, so the result does
    not depend on input order.
    """

    def __init__(
        self,
        max_iter: Optional[int] = None,
        tolerance: Optional[float] = None,
        check_monotonic: Optional[bool] = None,
        expert_init: Optional[float] = None,
        machine_init: Optional[float] = None,
    ):
        self.max_iter = settings.ALA_EM_MAX_ITER if max_iter is None else max_iter
        self.tolerance = settings.ALA_EM_TOLERANCE if tolerance is None else tolerance
        self.check_monotonic = settings.ALA_EM_CHECK_MONOTONIC if check_monotonic is None else check_monotonic
        self.expert_init = settings.ALA_EXPERT_INIT_ALPHA if expert_init is None else expert_init
        self.machine_init = settings.ALA_MACHINE_INIT_ALPHA if machine_init is None else machine_init

    def fit(self, bundles: Sequence[AnnotationBundle]) -> ReliabilityModel:
        if not bundles:
            raise EmptyInputError("EM needs at least one annotation bundle")
        classes = bundles[0].class_count
        if any(bundle.class_count != classes for bundle in bundles):
            raise DataError("all bundles must share the same class count")

        items = sorted(bundles, key=lambda b: b.item_id)
        annotators = sorted({annotator for bundle in items for annotator in bundle.annotators()})
        labels = self._label_matrix(items, annotators)

        if len(annotators) < 2:
            logger.warning(
                f"EM needs at least two annotators, got {annotators}; using reliability 0.5"
            )
            alpha = np.full(len(annotators), 0.5)
            prior = np.full(classes, 1.0 / classes)
            post, ll = self._e_step(labels, alpha, prior)
            return self._model(items, annotators, alpha, prior, post, ll, 0, False, [ll])

        alpha = np.array([
            self.machine_init if annotator == MACHINE_ANNOTATOR else self.expert_init
            for annotator in annotators
        ])
        prior = np.full(classes, 1.0 / classes)
        history: List[float] = []
        previous = -np.inf
        converged = False
        iteration = 0
        for iteration in range(1, self.max_iter + 1):
            post, ll = self._e_step(labels, alpha, prior)
            history.append(ll)
            if self.check_monotonic and ll < previous - 1e-9 * max(1.0, abs(previous)):
                raise ContractError(
                    f"EM log-likelihood decreased at iteration {iteration}: {previous} -> {ll}"
                )
            if ll - previous < self.tolerance:
                converged = True
                break
            previous = ll
            alpha, prior = self._m_step(labels, post)

        if converged:
            logger.info(f"EM converged after {iteration} iterations (log-likelihood {ll:.6f})")
        else:
            logger.warning(f"EM stopped at max_iter={self.max_iter} without converging")
        return self._model(items, annotators, alpha, prior, post, ll, iteration, converged, history)

    @staticmethod
    def _label_matrix(items: Sequence[AnnotationBundle], annotators: List[str]) -> np.ndarray:
        """items x annotators matrix of class indices, -1 where unlabeled."""
        column = {annotator: index for index, annotator in enumerate(annotators)}
        labels = np.full((len(items), len(annotators)), -1, dtype=int)
        for row, bundle in enumerate(items):
            for annotator, label in bundle.labels():
                labels[row, column[annotator]] = label
        return labels

    @staticmethod
    def log_joint(labels: np.ndarray, alpha: np.ndarray, prior: np.ndarray) -> np.ndarray:
        """log P(true class = c, observed labels) for every item and class."""
        classes = prior.shape[0]
        log_hit = np.log(alpha)
        log_miss = np.log((1.0 - alpha) / (classes - 1))
        with np.errstate(divide='ignore'):
            joint = np.tile(np.log(prior), (labels.shape[0], 1))
        for c in range(classes):
            observed = labels >= 0
            hit = labels == c
            joint[:, c] += (hit * log_hit).sum(axis=1) + ((observed & ~hit) * log_miss).sum(axis=1)
        return joint

    def _e_step(self, labels, alpha, prior):
        joint = self.log_joint(labels, alpha, prior)
        norm = logsumexp(joint, axis=1, keepdims=True)
        return np.exp(joint - norm), float(norm.sum())

    @staticmethod
    def _m_step(labels: np.ndarray, post: np.ndarray):
        observed = labels >= 0
        rows = np.arange(labels.shape[0])
        alpha = np.empty(labels.shape[1])
        for a in range(labels.shape[1]):
            mask = observed[:, a]
            alpha[a] = post[rows[mask], labels[mask, a]].mean()
        alpha = np.clip(alpha, ALPHA_EPS, 1.0 - ALPHA_EPS)
        prior = post.mean(axis=0)
        return alpha, prior

    @staticmethod
    def _model(items, annotators, alpha, prior, post, ll, iterations, converged, history):
        return ReliabilityModel(
            alpha={annotator: float(a) for annotator, a in zip(annotators, alpha)},
            class_prior=np.asarray(prior, dtype=np.float64),
            log_likelihood=float(ll),
            iterations=iterations,
            converged=converged,
            posteriors={bundle.item_id: post[row] for row, bundle in enumerate(items)},
            history=list(history),
        )


def em_reliability(bundles: Sequence[AnnotationBundle], **options) -> ReliabilityModel:
    """Estimate annotator reliabilities; options override the ALA_EM_* settings."""
    return ReliabilityEstimator(**options).fit(bundles)


def posterior(bundle: AnnotationBundle, model: ReliabilityModel) -> np.ndarray:
    """Posterior over the bundle's true class under a fitted model."""
    annotators = bundle.annotators()
    missing = [annotator for annotator in annotators if annotator not in model.alpha]
    if missing:
        raise ContractError(f"reliability model does not cover annotators {missing}")
    labels = np.array([[label for _, label in bundle.labels()]])
    alpha = np.array([model.alpha[annotator] for annotator in annotators])
    joint = ReliabilityEstimator.log_joint(labels, alpha, model.class_prior)[0]
    return np.exp(joint - logsumexp(joint))


def weighted_vote(bundle: AnnotationBundle, model: ReliabilityModel) -> int:
    """
    Reliability-weighted vote over one-hot labels.

    Ties within 1e-12 go to the lowest class index.

    Raises:
        EmptyInputError: if the bundle has no label
        ContractError: if the model lacks one of the bundle's annotators
    """
    pairs = bundle.labels()
    if not pairs:
        raise EmptyInputError(f"{bundle.item_id}: nothing to vote on")
    missing = [annotator for annotator, _ in pairs if annotator not in model.alpha]
    if missing:
        raise ContractError(f"reliability model does not cover annotators {missing}")
    total = sum(model.alpha[annotator] for annotator, _ in pairs)
    scores = np.zeros(bundle.class_count)
    for annotator, label in pairs:
        scores[label] += model.alpha[annotator] / total
    return int(np.flatnonzero(scores >= scores.max() - TIE_TOLERANCE)[0])


def weighted_rating(bundle: AnnotationBundle, model: ReliabilityModel) -> Optional[Tuple[float, float]]:
    """Reliability-weighted mean (valence, arousal) over the bundle's ratings."""
    rated = [(annotator, value) for annotator, value in sorted(bundle.ratings.items()) if annotator in model.alpha]
    if not rated:
        return None
    weights = np.array([model.alpha[annotator] for annotator, _ in rated])
    values = np.array([value for _, value in rated], dtype=np.float64)
    mean = (weights[:, None] * values).sum(axis=0) / weights.sum()
    return float(mean[0]), float(mean[1])


@dataclass
class AlaResult:
    fused: Dict[str, int]
    accepted: List[str]
    contested: List[str]
    model: Optional[ReliabilityModel]
    fused_ratings: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    consistency: List[Dict[str, object]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            'fused': {item: self.fused[item] for item in sorted(self.fused)},
            'accepted': len(self.accepted),
            'contested': len(self.contested),
            'reliability': self.model.to_dict() if self.model else None,
            'consistency': self.consistency,
        }


def run_ala(bundles: Sequence[AnnotationBundle], er_labels: Dict[str, int], **options) -> AlaResult:
    """
    Filter machine labels against ER labels, fit EM on the contested items
    (machine label included with its own reliability) and fuse them by
    weighted vote.
    """
    from .consistency import annotation_consistency

    by_id = {bundle.item_id: bundle for bundle in bundles}
    accepted, contested = consistency_filter(bundles, er_labels)
    fused = dict(accepted)
    fused_ratings: Dict[str, Tuple[float, float]] = {}
    model = None
    if contested:
        contested_bundles = [by_id[item] for item in contested]
        model = em_reliability(contested_bundles, **options)
        for bundle in contested_bundles:
            fused[bundle.item_id] = weighted_vote(bundle, model)
            rating = weighted_rating(bundle, model)
            if rating is not None:
                fused_ratings[bundle.item_id] = rating

    result = AlaResult(
        fused=fused,
        accepted=sorted(accepted),
        contested=contested,
        model=model,
        fused_ratings=fused_ratings,
    )
    result.consistency = annotation_consistency(
        [by_id[item] for item in contested], fused, fused_ratings
    )
    return result
