"""
Experiment tables built from cross-validation runs: modality, module and
eye-feature ablations, noise robustness, hyperparameter sweep, single- vs
multi-task comparison and the eye-behaviour correlation report.
"""

import logging
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from apps.core.exceptions import EmptyInputError, ParameterError
from apps.datamodel.types import EYE_CHANNEL_GROUPS, EYEMOVE_CHANNELS, FINE_CLASSES, MODALITIES, MultimodalSample
from apps.emert.model import EmertModel
from apps.metrics.correlation import COEFFICIENTS, correlations
from .runner import check_variances, cross_validate, run_cv, summarize
from .specs import MODULES, ExperimentSpec, ReportRow, aggregate, dims_of

logger = logging.getLogger(__name__)

DEFAULT_VARIANCES = (0.01, 0.05, 0.1)
DEFAULT_ALPHAS = (0.1, 0.3, 0.5)
DEFAULT_BETAS = (0.01, 0.1, 1.0)

MODULE_VARIANTS = (
    ('baseline', ()),
    ('+MAFD', ('MAFD',)),
    ('+EMT', ('EMT',)),
    ('+MAFD+EMT', MODULES),
)

EYE_FEATURE_VARIANTS = (
    ('gaze_point', ('gaze_point',)),
    ('gaze_time', ('gaze_time',)),
    ('pupil', ('pupil',)),
    ('all', None),
)

# Protocol pairs compared with and without the second head
MULTITASK_PAIRS = {
    'er3': ('er3', 'fer3'),
    'fer3': ('er3', 'fer3'),
    'er7': ('er7', 'fer7'),
    'fer7': ('er7', 'fer7'),
    'er_va': ('er_va', 'fer_va'),
    'fer_va': ('er_va', 'fer_va'),
    'fer_intensity': ('er_va', 'fer_intensity'),
}


def modality_subsets() -> List[tuple]:
    """Nonempty subsets of F, E, G, singles first: F, E, G, FE, FG, EG, FEG."""
    return [subset for size in range(1, len(MODALITIES) + 1) for subset in combinations(MODALITIES, size)]


def ablate_modalities(samples: Sequence[MultimodalSample], base_spec: ExperimentSpec, **run_options) -> List[ReportRow]:
    """
    One row per modality subset. Masked modalities are zeroed before
    encoding, so every row trains the same architecture.
    """
    rows = []
    for subset in modality_subsets():
        spec = base_spec.with_changes(modality_mask=subset)
        rows.append(run_cv(spec, samples, label=''.join(subset), **run_options))
    return rows


def discriminator_parameters(spec: ExperimentSpec, samples: Sequence[MultimodalSample]) -> int:
    model = EmertModel(spec.model_config(dims_of(samples)), seed=spec.seed)
    return sum(
        parameter.value.size for name, parameter in model.named_parameters() if name.startswith('discriminator')
    )


def ablate_modules(samples: Sequence[MultimodalSample], base_spec: ExperimentSpec, **run_options) -> List[ReportRow]:
    """
    baseline, +MAFD, +EMT and the full model. The baseline fuses the
    concatenated encoder outputs with a plain self-attention transformer.
    Rows with decoupled features carry held-out probe accuracies.
    """
    rows = []
    for label, modules in MODULE_VARIANTS:
        spec = base_spec.with_changes(module_mask=modules)
        row = run_cv(spec, samples, label=label, probe=True, **run_options)
        row.extra['discriminator_parameters'] = discriminator_parameters(spec, samples)
        rows.append(row)
    return rows


def noise_robustness(
    samples: Sequence[MultimodalSample],
    base_spec: ExperimentSpec,
    variances: Sequence[float] = DEFAULT_VARIANCES,
    **run_options,
) -> List[ReportRow]:
    """
    Train each fold once and score it clean and with zero-mean Gaussian
    test noise of every variance (fresh seeded draw per sample).

    The first row is the clean run; the others follow variances in order
    and carry the drop of each metric against it.

    Raises:
        ParameterError: for a negative variance or an empty variance list
    """
    variances = check_variances(variances)
    if not variances:
        raise ParameterError("noise_robustness needs at least one variance")
    clean_spec = base_spec.with_changes(noise_variance=0.0)
    folds = cross_validate(clean_spec, samples, variances=variances, **run_options)

    clean = summarize(clean_spec, folds, label='clean')
    rows = [clean]
    for variance in variances:
        spec = base_spec.with_changes(noise_variance=variance)
        fold_metrics = [fold.noisy_metrics(variance) for fold in folds]
        row = ReportRow.from_folds(spec, fold_metrics, label=f'var={variance:g}')
        for name in spec.metric_names:
            row.extra[f'drop_{name}'] = clean.mean[name] - row.mean[name]
        rows.append(row)
        logger.info(f"Noise variance {variance:g}: {row.mean}")
    return rows


def best_row(rows: Sequence[ReportRow]) -> int:
    """Index of the best row: highest mean WAR, or lowest mean MAE for regression."""
    if rows[0].spec.metric_names[0] == 'war':
        scores = [row.mean['war'] for row in rows]
        return int(np.nanargmax(scores))
    scores = [row.mean['mae'] for row in rows]
    return int(np.nanargmin(scores))


def sweep_hyperparams(
    samples: Sequence[MultimodalSample],
    base_spec: ExperimentSpec,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    betas: Sequence[float] = DEFAULT_BETAS,
    **run_options,
) -> List[ReportRow]:
    """
    Full factorial over alpha_adv x beta_task, alpha-major. The best cell
    is flagged with extra['best'].
    """
    if not alphas or not betas:
        raise ParameterError("the hyperparameter grid is empty")
    rows = []
    for alpha in alphas:
        for beta in betas:
            spec = base_spec.with_changes(alpha_adv=float(alpha), beta_task=float(beta))
            rows.append(run_cv(spec, samples, label=f'alpha={alpha:g},beta={beta:g}', **run_options))
    best = best_row(rows)
    for index, row in enumerate(rows):
        row.extra['best'] = index == best
    logger.info(f"Best cell of the sweep: {rows[best].label}")
    return rows


def compare_multitask(
    samples: Sequence[MultimodalSample],
    base_spec: ExperimentSpec,
    seeds: Sequence[int] = (0, 1, 2),
    **run_options,
) -> List[ReportRow]:
    """
    Single-task and multi-task rows for the ER and FER protocols of the
    base protocol's granularity, one row per seed.
    """
    if not seeds:
        raise ParameterError("compare_multitask needs at least one seed")
    rows = []
    for protocol in MULTITASK_PAIRS[base_spec.protocol]:
        for multitask in (False, True):
            mode = 'multi' if multitask else 'single'
            for seed in seeds:
                spec = base_spec.with_changes(protocol=protocol, multitask=multitask, seed=int(seed))
                row = run_cv(spec, samples, label=f'{protocol} {mode} seed={seed}', **run_options)
                row.extra['mode'] = mode
                rows.append(row)
    return rows


def multitask_summary(rows: Sequence[ReportRow]) -> pd.DataFrame:
    """Mean and per-seed values of the first metric per protocol and mode."""
    records = []
    for row in rows:
        metric = row.spec.metric_names[0]
        records.append({
            'protocol': row.spec.protocol,
            'mode': row.extra.get('mode'),
            'seed': row.spec.seed,
            'metric': metric,
            'value': row.mean[metric],
        })
    frame = pd.DataFrame(records)
    summary = frame.groupby(['protocol', 'mode', 'metric'], sort=True)['value'].agg(['mean', 'std', list])
    return summary.rename(columns={'list': 'per_seed'}).reset_index()


def ablate_eye_features(samples: Sequence[MultimodalSample], base_spec: ExperimentSpec, **run_options) -> List[ReportRow]:
    """Gaze point, gaze time, pupil and all eye-movement channels."""
    rows = []
    for label, groups in EYE_FEATURE_VARIANTS:
        spec = base_spec.with_changes(eye_groups=groups)
        rows.append(run_cv(spec, samples, label=label, **run_options))
    return rows


def correlation_report(samples: Sequence[MultimodalSample], eye_groups: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """
    Correlation of eye-movement features with each emotion class.

    For every fine class and label view the one-vs-rest indicator is
    correlated with each eye channel's per-sample mean; a cell is the mean
    absolute coefficient over channels where it is defined. A class absent
    from a view (or constant features) leaves the row undefined.
    """
    if len(samples) < 2:
        raise EmptyInputError("correlation_report needs at least two samples")
    features = np.stack([sample.eyemove_seq.mean(axis=0) for sample in samples])
    channels = range(features.shape[1])
    if eye_groups:
        names = {name for group in eye_groups for name in EYE_CHANNEL_GROUPS[group]}
        channels = [i for i, name in enumerate(EYEMOVE_CHANNELS) if name in names]

    records = []
    for emotion in FINE_CLASSES:
        for view in ('er', 'fer'):
            indicator = np.array([getattr(s.labels, f'{view}_fine') == emotion for s in samples], dtype=np.float64)
            per_coefficient = {name: [] for name in COEFFICIENTS}
            for channel in channels:
                values = correlations(features[:, channel], indicator, strict=False).to_dict()
                for name, value in values.items():
                    if value is not None:
                        per_coefficient[name].append(abs(value))
            record = {'emotion': emotion, 'view': view.upper(), 'support': int(indicator.sum())}
            for name in COEFFICIENTS:
                record[name] = aggregate(per_coefficient[name])[0] if per_coefficient[name] else None
            record['defined'] = all(record[name] is not None for name in COEFFICIENTS)
            records.append(record)

    frame = pd.DataFrame(records, columns=['emotion', 'view', 'support', *COEFFICIENTS, 'defined'])
    undefined = int((~frame['defined']).sum())
    if undefined:
        logger.warning(f"{undefined} correlation rows are undefined (absent class or constant features)")
    return frame
