"""
Celery tasks for running cross-validation folds on workers.
"""

import logging

from celery import shared_task

logger = logging.getLogger(__name__)


@shared_task
def run_fold_task(spec_data: dict, dataset_path: str, fold: int, variances=(), probe: bool = False) -> dict:
    """
    Train and score one fold from a dataset file.

    The worker rebuilds the split from the spec's seed, so every fold of a
    group sees the same assignment.
    """
    from apps.datamodel.io import load_dataset
    from apps.datamodel.splits import kfold_split
    from .runner import run_fold
    from .specs import ExperimentSpec

    spec = ExperimentSpec.from_dict(spec_data)
    samples = load_dataset(dataset_path)
    split = kfold_split(samples, k=spec.folds, seed=spec.seed)
    logger.info(f"Worker running fold {fold} of {spec.key()} from {dataset_path}")
    return run_fold(spec, samples, split, fold, variances, probe).to_dict()
