"""
Model configuration and benchmark protocols.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Optional, Tuple

from apps.core.exceptions import ConfigError, ParameterError
from apps.datamodel.types import MODALITIES, SequenceDims

TASK_MODES = ('classify3', 'classify7', 'regress_va', 'regress_intensity')
ADVERSARIAL_TARGETS = ('modality', 'emotion')

# Head output width per task mode
TASK_OUTPUTS = {
    'classify3': 3,
    'classify7': 7,
    'regress_va': 2,
    'regress_intensity': 1,
}

# protocol -> (ER task, FER task, scored view)
PROTOCOLS: Dict[str, Tuple[str, str, str]] = {
    'er3': ('classify3', 'classify3', 'er'),
    'er7': ('classify7', 'classify7', 'er'),
    'fer3': ('classify3', 'classify3', 'fer'),
    'fer7': ('classify7', 'classify7', 'fer'),
    'er_va': ('regress_va', 'regress_va', 'er'),
    'fer_va': ('regress_va', 'regress_va', 'fer'),
    'fer_intensity': ('regress_va', 'regress_intensity', 'fer'),
}


def is_classification(task: str) -> bool:
    return task.startswith('classify')


def granularity_of(task: str) -> str:
    return 'fine' if task == 'classify7' else 'coarse'


@dataclass
class ModelConfig:
    """
    Architecture, objective and optimisation settings of one EMERT model.

    shared_width is the common feature width S every encoder projects to;
    alpha_adv and beta_task weight the adversarial and task losses.
    """
    shared_width: int = 64
    face_hidden: int = 64
    eye_hidden: int = 64
    fixation_hidden: int = 64
    face_kernel: int = 3
    layers: int = 2
    heads: int = 4
    ff_width: int = 128
    grl_lambda: float = 1.0
    alpha_adv: float = 0.3
    beta_task: float = 0.1
    huber_delta: float = 1.0
    batch_size: int = 16
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 60
    weight_decay: float = 0.0
    grad_clip: Optional[float] = 5.0
    er_task: str = 'classify3'
    fer_task: str = 'classify3'
    use_mafd: bool = True
    use_emt: bool = True
    use_er_head: bool = True
    use_fer_head: bool = True
    adversarial_target: str = 'modality'
    train_noise_variance: float = 0.0
    modality_mask: Tuple[str, ...] = MODALITIES
    eye_channel_mask: Optional[Tuple[int, ...]] = None
    dims: SequenceDims = field(default_factory=SequenceDims)

    def __post_init__(self):
        self.modality_mask = tuple(m for m in MODALITIES if m in set(self.modality_mask))
        if self.eye_channel_mask is not None:
            self.eye_channel_mask = tuple(sorted(int(c) for c in self.eye_channel_mask))
        self.validate()

    def validate(self):
        """
        Raises:
            ConfigError: for structurally impossible settings
            ParameterError: for out-of-range numbers
        """
        for name in ('shared_width', 'face_hidden', 'eye_hidden', 'fixation_hidden', 'layers', 'heads',
                     'ff_width', 'batch_size', 'epochs'):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.shared_width % self.heads:
            raise ConfigError(f"shared_width {self.shared_width} is not divisible by heads {self.heads}")
        if self.face_kernel < 1 or self.face_kernel % 2 == 0:
            raise ConfigError(f"face_kernel must be a positive odd number, got {self.face_kernel}")
        for name in ('grl_lambda', 'alpha_adv', 'beta_task', 'learning_rate', 'weight_decay',
                     'train_noise_variance'):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.huber_delta <= 0:
            raise ParameterError(f"huber_delta must be > 0, got {self.huber_delta}")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ParameterError(f"grad_clip must be > 0 when set, got {self.grad_clip}")
        for name in ('er_task', 'fer_task'):
            if getattr(self, name) not in TASK_MODES:
                raise ConfigError(f"{name} must be one of {TASK_MODES}, got '{getattr(self, name)}'")
        if self.er_task == 'regress_intensity':
            raise ConfigError("expression intensity is a FER label; er_task cannot be regress_intensity")
        if self.adversarial_target not in ADVERSARIAL_TARGETS:
            raise ConfigError(
                f"adversarial_target must be one of {ADVERSARIAL_TARGETS}, got '{self.adversarial_target}'"
            )
        if not self.modality_mask:
            raise ConfigError("modality_mask must keep at least one of F, E, G")
        if not (self.use_er_head or self.use_fer_head):
            raise ConfigError("at least one prediction head must be enabled")
        if self.eye_channel_mask is not None and any(
            not 0 <= c < self.dims.eye_channels for c in self.eye_channel_mask
        ):
            raise ConfigError(f"eye_channel_mask indices must lie in [0, {self.dims.eye_channels})")

    @classmethod
    def for_protocol(cls, protocol: str, **overrides) -> 'ModelConfig':
        if protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol '{protocol}', expected one of {sorted(PROTOCOLS)}")
        er_task, fer_task, _ = PROTOCOLS[protocol]
        return cls(er_task=er_task, fer_task=fer_task, **overrides)

    @property
    def discriminator_classes(self) -> int:
        if self.adversarial_target == 'modality':
            return len(MODALITIES)
        return 7 if 'classify7' in (self.er_task, self.fer_task) else 3

    def with_changes(self, **changes) -> 'ModelConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data['modality_mask'] = list(self.modality_mask)
        data['eye_channel_mask'] = list(self.eye_channel_mask) if self.eye_channel_mask is not None else None
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> 'ModelConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown model settings: {unknown}")
        values = dict(data)
        if isinstance(values.get('dims'), dict):
            values['dims'] = SequenceDims(**values['dims'])
        if values.get('modality_mask') is not None:
            values['modality_mask'] = tuple(values['modality_mask'])
        return cls(**values)
