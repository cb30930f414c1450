"""
K-fold cross-validation of one experiment spec.

Each fold trains its own model; folds run serially, on a thread pool or
as a Celery group, and results are always reduced in fold order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from django.conf import settings

from apps.core.exceptions import ConfigError, ContractError, EmptyInputError, ParameterError
from apps.datamodel.splits import kfold_split
from apps.datamodel.types import DatasetSplit, MultimodalSample
from apps.emert.evaluation import evaluate
from apps.emert.probes import probe_decoupling
from apps.emert.training import train
from .specs import ExperimentSpec, ReportRow, aggregate, dims_of

logger = logging.getLogger(__name__)

EXECUTORS = ('serial', 'threads', 'celery')

# Minimum held-out samples for a probe run
PROBE_MIN_SAMPLES = 4


@dataclass
class FoldResult:
    """
    Scores of one fold. metrics is the scored head at the spec's own noise
    level; noisy holds the scored head at each extra test variance.
    """
    fold: int
    n_train: int
    n_test: int
    metrics: Dict[str, float]
    train_metrics: Dict[str, float] = field(default_factory=dict)
    heads: Dict[str, Dict[str, float]] = field(default_factory=dict)
    noisy: List[Dict[str, float]] = field(default_factory=list)
    disc_acc_generic: float = float('nan')
    disc_acc_unique: float = float('nan')
    probe: Optional[Dict[str, float]] = None
    parameters: int = 0

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> 'FoldResult':
        return cls(**data)

    def noisy_metrics(self, variance: float) -> Dict[str, float]:
        for entry in self.noisy:
            if entry['variance'] == variance:
                return {key: value for key, value in entry.items() if key != 'variance'}
        raise ContractError(f"fold {self.fold} was not evaluated at variance {variance}")


def check_variances(variances: Sequence[float]) -> List[float]:
    variances = [float(v) for v in variances]
    negative = [v for v in variances if v < 0]
    if negative:
        raise ParameterError(f"noise variances must be >= 0, got {negative}")
    return variances


def run_fold(
    spec: ExperimentSpec,
    samples: Sequence[MultimodalSample],
    split: DatasetSplit,
    fold: int,
    variances: Sequence[float] = (),
    probe: bool = False,
    dump_dir: Optional[Union[str, Path]] = None,
) -> FoldResult:
    """
    Train on every fold but `fold` and score the held-out fold.

    Raises:
        ContractError: if any held-out sample reached a training batch
    """
    variances = check_variances(variances)
    by_id = {sample.sample_id: sample for sample in samples}
    train_ids, test_ids = split.train_ids(fold), split.test_ids(fold)
    if not test_ids or not train_ids:
        raise EmptyInputError(f"fold {fold} has {len(train_ids)} training and {len(test_ids)} test samples")
    if set(train_ids) & set(test_ids):
        raise ContractError(f"fold {fold}: train and test ids overlap")

    cfg = spec.model_config(dims_of(samples))
    seed = spec.seed * 100 + fold
    training = [by_id[sample_id] for sample_id in train_ids]
    held_out = [by_id[sample_id] for sample_id in test_ids]

    result = train(training, cfg, seed=seed, dump_dir=dump_dir)
    leaked = set(result.seen_ids) & set(test_ids)
    if leaked:
        raise ContractError(f"fold {fold}: test samples {sorted(leaked)[:5]} appeared in training batches")

    model = result.model
    view = spec.scored_view
    heads = evaluate(
        model, held_out, noise_variance=spec.noise_variance, rng=np.random.default_rng([spec.seed, fold, 7])
    ).scores(cfg)
    train_scores = evaluate(model, training).scores(cfg)

    noisy = []
    for variance in variances:
        scores = evaluate(
            model, held_out, noise_variance=variance, rng=np.random.default_rng([spec.seed, fold, 7])
        ).scores(cfg)
        noisy.append({'variance': variance, **scores[view]})

    probe_report = None
    if probe and model.has_extractors:
        if len(held_out) >= PROBE_MIN_SAMPLES:
            probe_report = probe_decoupling(model, held_out, seed=seed).to_dict()
        else:
            logger.warning(f"Fold {fold}: {len(held_out)} held-out samples are too few to probe")

    last = result.log.last
    fold_result = FoldResult(
        fold=fold,
        n_train=len(training),
        n_test=len(held_out),
        metrics=heads[view],
        train_metrics=train_scores[view],
        heads=heads,
        noisy=noisy,
        disc_acc_generic=float(last.get('disc_acc_generic', float('nan'))),
        disc_acc_unique=float(last.get('disc_acc_unique', float('nan'))),
        probe=probe_report,
        parameters=model.parameter_count(),
    )
    logger.info(f"Fold {fold}/{split.fold_count} of {spec.key()}: {heads[view]}")
    return fold_result


def _resolve_executor(executor: Optional[str]) -> str:
    executor = (executor or settings.LAB_EXECUTOR).lower()
    if executor not in EXECUTORS:
        raise ConfigError(f"unknown executor '{executor}', expected one of {EXECUTORS}")
    return executor


def execute_folds(
    spec: ExperimentSpec,
    samples: Sequence[MultimodalSample],
    split: DatasetSplit,
    variances: Sequence[float] = (),
    probe: bool = False,
    executor: Optional[str] = None,
    threads: Optional[int] = None,
    dataset_path: Optional[Union[str, Path]] = None,
) -> List[FoldResult]:
    """
    Run every fold with the chosen executor and return results in fold order.

    The celery executor ships the dataset path, not the samples, to its
    workers, so it needs dataset_path.
    """
    executor = _resolve_executor(executor)
    folds = list(range(split.fold_count))
    variances = check_variances(variances)

    if executor == 'threads' and (threads or settings.LAB_THREADS) > 1:
        workers = min(threads or settings.LAB_THREADS, len(folds))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda fold: run_fold(spec, samples, split, fold, variances, probe), folds))
    elif executor == 'celery':
        if dataset_path is None:
            raise ConfigError("the celery executor needs the dataset path")
        from celery import group

        from .tasks import run_fold_task

        job = group(
            run_fold_task.s(spec.to_dict(), str(dataset_path), fold, variances, probe) for fold in folds
        )
        results = [FoldResult.from_dict(result.get()) for result in job.apply_async().results]
    else:
        results = [run_fold(spec, samples, split, fold, variances, probe) for fold in folds]

    return sorted(results, key=lambda result: result.fold)


def cross_validate(
    spec: ExperimentSpec,
    samples: Sequence[MultimodalSample],
    variances: Sequence[float] = (),
    probe: bool = False,
    executor: Optional[str] = None,
    threads: Optional[int] = None,
    dataset_path: Optional[Union[str, Path]] = None,
) -> List[FoldResult]:
    if not samples:
        raise EmptyInputError("cross-validation needs a nonempty dataset")
    split = kfold_split(samples, k=spec.folds, seed=spec.seed)
    return execute_folds(spec, samples, split, variances, probe, executor, threads, dataset_path)


def summarize(spec: ExperimentSpec, folds: Sequence[FoldResult], label: str = '') -> ReportRow:
    """Report row of the scored head with training and decoupling extras."""
    extra: Dict[str, object] = {}
    for name in spec.metric_names:
        extra[f'train_{name}'] = aggregate([fold.train_metrics[name] for fold in folds])[0]
    extra['disc_acc_generic'] = aggregate([fold.disc_acc_generic for fold in folds])[0]
    extra['disc_acc_unique'] = aggregate([fold.disc_acc_unique for fold in folds])[0]
    probes = [fold.probe for fold in folds if fold.probe]
    if probes:
        extra['probe_acc_generic'] = aggregate([p['probe_acc_generic'] for p in probes])[0]
        extra['probe_acc_unique'] = aggregate([p['probe_acc_unique'] for p in probes])[0]
    extra['parameters'] = folds[0].parameters if folds else 0
    return ReportRow.from_folds(spec, [fold.metrics for fold in folds], label=label, **extra)


def run_cv(
    spec: ExperimentSpec,
    samples: Sequence[MultimodalSample],
    label: str = '',
    probe: bool = False,
    **run_options,
) -> ReportRow:
    """
    Cross-validate spec on samples and aggregate the scored metrics.

    Classification protocols report WAR, UAR and macro F1; regression
    protocols MAE, MSE and RMSE.
    """
    folds = cross_validate(spec, samples, probe=probe, **run_options)
    row = summarize(spec, folds, label=label)
    logger.info(f"Cross-validated {row.label}: {row.mean}")
    return row
