"""
Domain types for multimodal samples, dual label sets and splits.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np
from django.conf import settings

from apps.core.exceptions import DataError, LabelRangeError, ParameterError


class CoarseEmotion(Enum):
    """Three-way emotion polarity."""
    POSITIVE = 'positive'
    NEGATIVE = 'negative'
    NEUTRAL = 'neutral'


class FineEmotion(Enum):
    """Seven-way discrete emotion category."""
    HAPPINESS = 'happiness'
    SADNESS = 'sadness'
    FEAR = 'fear'
    SURPRISE = 'surprise'
    DISGUST = 'disgust'
    ANGER = 'anger'
    NEUTRAL = 'neutral'


COARSE_CLASSES: Tuple[str, ...] = tuple(c.value for c in CoarseEmotion)
FINE_CLASSES: Tuple[str, ...] = tuple(f.value for f in FineEmotion)

MODALITIES: Tuple[str, ...] = ('F', 'E', 'G')  # face, eye movement, fixation map

# Channel layout of the eye-movement sequence
EYEMOVE_CHANNELS: Tuple[str, ...] = (
    'gaze_x', 'gaze_y', 'gaze_dir_x', 'gaze_dir_y', 'pupil_fluct',
    'eye_pos_x', 'eye_pos_y', 'eye_pos_z', 'gaze_time',
)

EYE_CHANNEL_GROUPS: Dict[str, Tuple[str, ...]] = {
    'gaze_point': ('gaze_x', 'gaze_y', 'gaze_dir_x', 'gaze_dir_y'),
    'gaze_time': ('gaze_time',),
    'pupil': ('pupil_fluct',),
    'eye_position': ('eye_pos_x', 'eye_pos_y', 'eye_pos_z'),
}


def coarse_map() -> Dict[str, str]:
    """
    Fine-to-coarse mapping.

    Surprise is positive unless DATAMODEL_SURPRISE_COARSE says otherwise.
    """
    surprise = getattr(settings, 'DATAMODEL_SURPRISE_COARSE', CoarseEmotion.POSITIVE.value)
    return {
        'happiness': 'positive',
        'surprise': surprise,
        'sadness': 'negative',
        'fear': 'negative',
        'disgust': 'negative',
        'anger': 'negative',
        'neutral': 'neutral',
    }


def coarse_of(fine: str) -> str:
    return coarse_map()[fine]


@dataclass(frozen=True)
class LabelSet:
    """
    ER and FER labels of one trial.

    ER labels describe the inner emotion, FER labels the displayed
    expression; both views carry coarse and fine categories plus
    valence/arousal, and FER adds an expression intensity.
    """
    er_coarse: str
    er_fine: str
    fer_coarse: str
    fer_fine: str
    er_valence: float
    er_arousal: float
    fer_valence: float
    fer_arousal: float
    fer_intensity: float

    def __post_init__(self):
        for name in ('er_fine', 'fer_fine'):
            if getattr(self, name) not in FINE_CLASSES:
                raise LabelRangeError(name, getattr(self, name))
        for name in ('er_coarse', 'fer_coarse'):
            if getattr(self, name) not in COARSE_CLASSES:
                raise LabelRangeError(name, getattr(self, name))
        for name in ('er_valence', 'er_arousal', 'fer_valence', 'fer_arousal'):
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise LabelRangeError(name, value, f"{name}={value} must lie in [-1, 1]")
        if not 0.0 <= self.fer_intensity <= 3.0:
            raise LabelRangeError(
                'fer_intensity', self.fer_intensity,
                f"fer_intensity={self.fer_intensity} must lie in [0, 3]"
            )
        mapping = coarse_map()
        for view in ('er', 'fer'):
            fine = getattr(self, f'{view}_fine')
            coarse = getattr(self, f'{view}_coarse')
            if mapping[fine] != coarse:
                raise LabelRangeError(
                    f'{view}_coarse', coarse,
                    f"{view}_coarse={coarse} is inconsistent with {view}_fine={fine}"
                )

    @classmethod
    def from_fine(cls, er_fine: str, fer_fine: str, **continuous) -> 'LabelSet':
        return cls(
            er_coarse=coarse_of(er_fine),
            er_fine=er_fine,
            fer_coarse=coarse_of(fer_fine),
            fer_fine=fer_fine,
            **continuous
        )

    def class_index(self, view: str, granularity: str) -> int:
        """Index of the view's label among the coarse (3) or fine (7) classes."""
        if granularity == 'coarse':
            return COARSE_CLASSES.index(getattr(self, f'{view}_coarse'))
        return FINE_CLASSES.index(getattr(self, f'{view}_fine'))

    def valence_arousal(self, view: str) -> Tuple[float, float]:
        return getattr(self, f'{view}_valence'), getattr(self, f'{view}_arousal')

    def to_dict(self) -> Dict[str, object]:
        return {
            'er_coarse': self.er_coarse,
            'er_fine': self.er_fine,
            'fer_coarse': self.fer_coarse,
            'fer_fine': self.fer_fine,
            'er_valence': self.er_valence,
            'er_arousal': self.er_arousal,
            'fer_valence': self.fer_valence,
            'fer_arousal': self.fer_arousal,
            'fer_intensity': self.fer_intensity,
        }


@dataclass(frozen=True)
class SequenceDims:
    """Per-modality sequence lengths and raw channel widths."""
    face_frames: int = 8
    eye_frames: int = 32
    fixation_frames: int = 32
    face_channels: int = 16
    eye_channels: int = len(EYEMOVE_CHANNELS)
    fixation_channels: int = 16


@dataclass
class MultimodalSample:
    """
    Aligned face, eye-movement and fixation feature sequences of one trial.
    """
    sample_id: str
    face_seq: np.ndarray
    eyemove_seq: np.ndarray
    fixation_seq: np.ndarray
    labels: LabelSet

    def __post_init__(self):
        for name in ('face_seq', 'eyemove_seq', 'fixation_seq'):
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if value.ndim != 2:
                raise DataError(f"{self.sample_id}: {name} must be 2-D, got shape {value.shape}")
            if not np.all(np.isfinite(value)):
                raise DataError(f"{self.sample_id}: {name} contains NaN or Inf")
            setattr(self, name, value)

    def modality(self, key: str) -> np.ndarray:
        return {'F': self.face_seq, 'E': self.eyemove_seq, 'G': self.fixation_seq}[key]

    def __eq__(self, other):
        if not isinstance(other, MultimodalSample):
            return NotImplemented
        return (
            self.sample_id == other.sample_id
            and self.labels == other.labels
            and all(
                np.array_equal(self.modality(key), other.modality(key))
                for key in MODALITIES
            )
        )


@dataclass(frozen=True)
class GapSpec:
    """
    Controls the synthetic emotion gap.

    gap_rate is the probability that a generated sample's fer_fine differs
    from its er_fine.
    """
    gap_rate: float = 0.3
    class_priors: Tuple[float, ...] = tuple([1.0 / 7] * 7)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gap_rate <= 1.0:
            raise ParameterError(f"gap_rate must lie in [0, 1], got {self.gap_rate}")
        priors = np.asarray(self.class_priors, dtype=np.float64)
        if priors.shape != (len(FINE_CLASSES),):
            raise ParameterError(f"class_priors needs {len(FINE_CLASSES)} entries, got {priors.shape}")
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
            raise ParameterError("class_priors must be nonnegative and sum to 1")


@dataclass
class DatasetSplit:
    """
    Fold assignment for k-fold cross-validation.
    """
    fold_count: int
    assignments: Dict[str, int] = field(default_factory=dict)
    stratified: bool = True

    def test_ids(self, fold: int) -> List[str]:
        return sorted(sid for sid, f in self.assignments.items() if f == fold)

    def train_ids(self, fold: int) -> List[str]:
        return sorted(sid for sid, f in self.assignments.items() if f != fold)

    def fold_sizes(self) -> List[int]:
        counts = [0] * self.fold_count
        for fold in self.assignments.values():
            counts[fold] += 1
        return counts
