"""
Experiment specs and report rows.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import ConfigError, ContractError, DataError, EmptyInputError, ParameterError
from apps.datamodel.types import EYE_CHANNEL_GROUPS, EYEMOVE_CHANNELS, MODALITIES, MultimodalSample, SequenceDims
from apps.emert.config import PROTOCOLS, ModelConfig, is_classification

logger = logging.getLogger(__name__)

MODULES: Tuple[str, ...] = ('MAFD', 'EMT')

CLASSIFICATION_METRICS = ('war', 'uar', 'f1')
REGRESSION_METRICS = ('mae', 'mse', 'rmse')

# Model settings an experiment spec decides; model_overrides may not touch them
SPEC_CONTROLLED = frozenset({
    'er_task', 'fer_task', 'use_mafd', 'use_emt', 'use_er_head', 'use_fer_head',
    'modality_mask', 'eye_channel_mask', 'alpha_adv', 'beta_task', 'dims',
})


@dataclass
class ExperimentSpec:
    """
    Everything needed to rerun one cross-validated experiment.

    The protocol fixes the task mode of both heads and which head is
    scored. noise_variance is applied to test inputs only; train-time
    noise goes through model_overrides['train_noise_variance'].
    """
    protocol: str = 'er3'
    modality_mask: Tuple[str, ...] = MODALITIES
    module_mask: Tuple[str, ...] = MODULES
    noise_variance: float = 0.0
    alpha_adv: float = 0.3
    beta_task: float = 0.1
    folds: int = 5
    seed: int = 0
    multitask: bool = True
    eye_groups: Optional[Tuple[str, ...]] = None
    model_overrides: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.modality_mask = tuple(m for m in MODALITIES if m in set(self.modality_mask))
        self.module_mask = tuple(m for m in MODULES if m in set(self.module_mask))
        if self.eye_groups is not None:
            self.eye_groups = tuple(self.eye_groups)
        self.model_overrides = dict(self.model_overrides)
        self.validate()

    def validate(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol '{self.protocol}', expected one of {sorted(PROTOCOLS)}")
        if not self.modality_mask:
            raise ConfigError("modality_mask must keep at least one of F, E, G")
        if self.noise_variance < 0:
            raise ParameterError(f"noise_variance must be >= 0, got {self.noise_variance}")
        if self.alpha_adv < 0 or self.beta_task < 0:
            raise ParameterError("alpha_adv and beta_task must be >= 0")
        if self.folds < 2:
            raise ParameterError(f"folds must be >= 2, got {self.folds}")
        if self.eye_groups is not None:
            unknown = [g for g in self.eye_groups if g not in EYE_CHANNEL_GROUPS]
            if unknown or not self.eye_groups:
                raise ConfigError(
                    f"eye_groups must be a nonempty subset of {sorted(EYE_CHANNEL_GROUPS)}, got {self.eye_groups}"
                )
        known = {f.name for f in fields(ModelConfig)}
        unknown = sorted(set(self.model_overrides) - known)
        if unknown:
            raise ConfigError(f"unknown model settings: {unknown}")
        clashing = sorted(set(self.model_overrides) & SPEC_CONTROLLED)
        if clashing:
            raise ConfigError(
                f"{clashing} are fixed by the protocol and spec fields and cannot be overridden",
                details={'protocol': self.protocol, 'fields': clashing},
            )

    @property
    def scored_view(self) -> str:
        return PROTOCOLS[self.protocol][2]

    @property
    def scored_task(self) -> str:
        er_task, fer_task, view = PROTOCOLS[self.protocol]
        return er_task if view == 'er' else fer_task

    @property
    def metric_names(self) -> Tuple[str, ...]:
        return CLASSIFICATION_METRICS if is_classification(self.scored_task) else REGRESSION_METRICS

    def eye_channel_indices(self) -> Optional[Tuple[int, ...]]:
        if self.eye_groups is None:
            return None
        names = {name for group in self.eye_groups for name in EYE_CHANNEL_GROUPS[group]}
        return tuple(i for i, name in enumerate(EYEMOVE_CHANNELS) if name in names)

    def model_config(self, dims: SequenceDims) -> ModelConfig:
        """
        Build the model config for this spec.

        A single-task spec keeps only the head of the scored view.
        """
        er_task, fer_task, view = PROTOCOLS[self.protocol]
        values = dict(self.model_overrides)
        values.update(
            er_task=er_task,
            fer_task=fer_task,
            use_mafd='MAFD' in self.module_mask,
            use_emt='EMT' in self.module_mask,
            use_er_head=self.multitask or view == 'er',
            use_fer_head=self.multitask or view == 'fer',
            modality_mask=self.modality_mask,
            eye_channel_mask=self.eye_channel_indices(),
            alpha_adv=self.alpha_adv,
            beta_task=self.beta_task,
            dims=dims,
        )
        return ModelConfig(**values)

    def key(self) -> str:
        modules = '+'.join(self.module_mask) or 'baseline'
        eyes = '+'.join(self.eye_groups) if self.eye_groups else 'all'
        mode = 'multi' if self.multitask else 'single'
        return (
            f"{self.protocol}|{''.join(self.modality_mask)}|{modules}|eye={eyes}|"
            f"a={self.alpha_adv:g}|b={self.beta_task:g}|var={self.noise_variance:g}|{mode}|seed={self.seed}"
        )

    def with_changes(self, **changes) -> 'ExperimentSpec':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data['modality_mask'] = list(self.modality_mask)
        data['module_mask'] = list(self.module_mask)
        data['eye_groups'] = list(self.eye_groups) if self.eye_groups is not None else None
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> 'ExperimentSpec':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown experiment settings: {unknown}")
        return cls(**data)


def dims_of(samples: Sequence[MultimodalSample]) -> SequenceDims:
    """
    Sequence dimensions shared by every sample.

    Raises:
        EmptyInputError: for an empty dataset
        DataError: if samples disagree on any sequence shape
    """
    if not samples:
        raise EmptyInputError("the dataset is empty")
    shapes = {(s.face_seq.shape, s.eyemove_seq.shape, s.fixation_seq.shape) for s in samples}
    if len(shapes) > 1:
        raise DataError(f"samples have {len(shapes)} different sequence shapes", details={'shapes': str(shapes)})
    face, eye, fixation = shapes.pop()
    return SequenceDims(
        face_frames=face[0], eye_frames=eye[0], fixation_frames=fixation[0],
        face_channels=face[1], eye_channels=eye[1], fixation_channels=fixation[1],
    )


def aggregate(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and population std over the finite values; NaN when there are none."""
    finite = np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=np.float64)
    if finite.size == 0:
        return float('nan'), float('nan')
    return float(finite.mean()), float(finite.std())


@dataclass
class ReportRow:
    """
    One table row: the spec, per-fold scores of the scored head and their
    mean and std across folds.
    """
    spec: ExperimentSpec
    fold_metrics: List[Dict[str, float]]
    mean: Dict[str, float]
    std: Dict[str, float]
    label: str = ''
    extra: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.fold_metrics) != self.spec.folds:
            raise ContractError(
                f"report has {len(self.fold_metrics)} folds but the spec asks for {self.spec.folds}"
            )

    @classmethod
    def from_folds(cls, spec: ExperimentSpec, fold_metrics: List[Dict[str, float]], label: str = '', **extra):
        mean, std = {}, {}
        for name in spec.metric_names:
            mean[name], std[name] = aggregate([metrics[name] for metrics in fold_metrics])
        return cls(spec=spec, fold_metrics=fold_metrics, mean=mean, std=std, label=label or spec.key(), extra=extra)

    def to_record(self) -> Dict[str, object]:
        """Flat row for the CSV report."""
        spec = self.spec
        record = {
            'label': self.label,
            'protocol': spec.protocol,
            'modalities': ''.join(spec.modality_mask),
            'modules': '+'.join(spec.module_mask) or 'baseline',
            'eye_groups': '+'.join(spec.eye_groups) if spec.eye_groups else 'all',
            'alpha_adv': spec.alpha_adv,
            'beta_task': spec.beta_task,
            'noise_variance': spec.noise_variance,
            'multitask': spec.multitask,
            'seed': spec.seed,
            'folds': spec.folds,
        }
        for name in spec.metric_names:
            record[f'mean_{name}'] = self.mean[name]
            record[f'std_{name}'] = self.std[name]
        for fold, metrics in enumerate(self.fold_metrics):
            for name in spec.metric_names:
                record[f'fold{fold}_{name}'] = metrics[name]
        record.update(self.extra)
        return record
