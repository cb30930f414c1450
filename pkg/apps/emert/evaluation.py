"""
Batched inference and per-head scoring.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from apps.core.exceptions import EmptyInputError
from apps.datamodel.types import MultimodalSample
from apps.metrics.services import ConfusionMatrix, classification_metrics, regression_metrics
from .config import TASK_OUTPUTS, ModelConfig, is_classification
from .losses import head_targets
from .model import EmertModel, make_batch

EVAL_BATCH_SIZE = 64


@dataclass
class Evaluation:
    """Predictions and targets of every enabled head, in sample order."""
    sample_ids: List[str]
    predictions: Dict[str, np.ndarray] = field(default_factory=dict)
    targets: Dict[str, np.ndarray] = field(default_factory=dict)

    def scores(self, cfg: ModelConfig) -> Dict[str, Dict[str, float]]:
        """WAR/UAR/F1 for classification heads, MAE/MSE/RMSE for regression heads."""
        results = {}
        for view, predicted in self.predictions.items():
            task = cfg.er_task if view == 'er' else cfg.fer_task
            if is_classification(task):
                cm = ConfusionMatrix.from_predictions(self.targets[view], predicted, TASK_OUTPUTS[task])
                report = classification_metrics(cm)
                results[view] = {'war': report.war, 'uar': report.uar, 'f1': report.f1}
            else:
                report = regression_metrics(predicted, self.targets[view])
                results[view] = report.to_dict()
        return results


def evaluate(
    model: EmertModel,
    samples: Sequence[MultimodalSample],
    noise_variance: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    batch_size: int = EVAL_BATCH_SIZE,
) -> Evaluation:
    """
    Run inference over samples; test-time noise is drawn per sample from rng.
    """
    if not samples:
        raise EmptyInputError("nothing to evaluate")
    cfg = model.config
    chunks: Dict[str, List[np.ndarray]] = {}
    for start in range(0, len(samples), batch_size):
        batch = make_batch(samples[start:start + batch_size], cfg, noise_variance=noise_variance, rng=rng)
        for view, values in model.predict(batch).items():
            chunks.setdefault(view, []).append(values)

    labels = [sample.labels for sample in samples]
    evaluation = Evaluation(sample_ids=[sample.sample_id for sample in samples])
    for view, parts in chunks.items():
        task = cfg.er_task if view == 'er' else cfg.fer_task
        evaluation.predictions[view] = np.concatenate(parts, axis=0)
        evaluation.targets[view] = head_targets(labels, task, view)
    return evaluation
