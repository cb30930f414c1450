"""
Synthetic multimodal dataset with a controllable emotion gap.

Eye-movement and fixation sequences are drawn around prototypes of the
inner (ER) emotion, face sequences around prototypes of the displayed
(FER) expression. With probability gap_rate the displayed expression is
drawn from a masking kernel instead of copying the inner emotion.
"""

import logging
from typing import List, Optional

import numpy as np
from scipy.ndimage import uniform_filter1d

from apps.core.exceptions import ParameterError
from .types import FINE_CLASSES, GapSpec, LabelSet, MultimodalSample, SequenceDims

logger = logging.getLogger(__name__)

# (valence, arousal) prototype per fine class, in FINE_CLASSES order
VA_PROTOTYPES = np.array([
    [0.7, 0.5],     # happiness
    [-0.6, -0.4],   # sadness
    [-0.6, 0.6],    # fear
    [0.3, 0.7],     # surprise
    [-0.5, 0.2],    # disgust
    [-0.7, 0.7],    # anger
    [0.0, -0.1],    # neutral
])

INTENSITY_PROTOTYPES = np.array([2.0, 1.5, 1.8, 2.2, 1.6, 2.1, 0.3])

# Expressions people tend to put on over a different inner emotion
MASK_WEIGHTS = {'neutral': 3.0, 'happiness': 2.0}

VA_NOISE = 0.15
INTENSITY_NOISE = 0.3


def gap_kernel() -> np.ndarray:
    """
    Row-stochastic 7x7 matrix of P(fer_fine | er_fine, gap) with a zero diagonal.
    """
    weights = np.array([MASK_WEIGHTS.get(name, 1.0) for name in FINE_CLASSES])
    kernel = np.tile(weights, (len(FINE_CLASSES), 1))
    np.fill_diagonal(kernel, 0.0)
    return kernel / kernel.sum(axis=1, keepdims=True)


def _sequence(rng: np.random.Generator, prototype: np.ndarray, frames: int, noise_scale: float) -> np.ndarray:
    noise = rng.normal(scale=noise_scale, size=(frames, prototype.shape[0]))
    return prototype + uniform_filter1d(noise, size=3, axis=0, mode='nearest')


def generate_synthetic(
    n: int,
    spec: Optional[GapSpec] = None,
    dims: Optional[SequenceDims] = None,
    noise_scale: float = 0.8,
) -> List[MultimodalSample]:
    """
    Generate n labelled samples.

    Args:
        n: number of samples
        spec: gap rate, class priors and seed
        dims: sequence lengths and raw channel widths
        noise_scale: standard deviation of the per-frame perturbation

    Raises:
        ParameterError: if n is not positive or the priors are invalid
    """
    if n <= 0:
        raise ParameterError(f"n must be > 0, got {n}")
    spec = spec or GapSpec()
    dims = dims or SequenceDims()
    classes = len(FINE_CLASSES)

    proto_seed, sample_seed = np.random.SeedSequence(spec.seed).spawn(2)
    proto_rng = np.random.default_rng(proto_seed)
    face_protos = proto_rng.normal(size=(classes, dims.face_channels))
    eye_protos = proto_rng.normal(size=(classes, dims.eye_channels))
    fixation_protos = proto_rng.normal(size=(classes, dims.fixation_channels))

    rng = np.random.default_rng(sample_seed)
    priors = np.asarray(spec.class_priors, dtype=np.float64)
    er_index = rng.choice(classes, size=n, p=priors)
    gapped = rng.random(n) < spec.gap_rate
    kernel = gap_kernel()

    samples = []
    for i in range(n):
        er = int(er_index[i])
        fer = int(rng.choice(classes, p=kernel[er])) if gapped[i] else er
        er_va = np.clip(VA_PROTOTYPES[er] + rng.uniform(-VA_NOISE, VA_NOISE, size=2), -1.0, 1.0)
        fer_va = np.clip(VA_PROTOTYPES[fer] + rng.uniform(-VA_NOISE, VA_NOISE, size=2), -1.0, 1.0)
        intensity = float(np.clip(
            INTENSITY_PROTOTYPES[fer] + rng.uniform(-INTENSITY_NOISE, INTENSITY_NOISE), 0.0, 3.0
        ))
        labels = LabelSet.from_fine(
            FINE_CLASSES[er], FINE_CLASSES[fer],
            er_valence=float(er_va[0]),
            er_arousal=float(er_va[1]),
            fer_valence=float(fer_va[0]),
            fer_arousal=float(fer_va[1]),
            fer_intensity=intensity,
        )
        samples.append(MultimodalSample(
            sample_id=f's{i:05d}',
            face_seq=_sequence(rng, face_protos[fer], dims.face_frames, noise_scale),
            eyemove_seq=_sequence(rng, eye_protos[er], dims.eye_frames, noise_scale),
            fixation_seq=_sequence(rng, fixation_protos[er], dims.fixation_frames, noise_scale),
            labels=labels,
        ))

    disagreement = np.mean([s.labels.er_fine != s.labels.fer_fine for s in samples])
    logger.info(f"Generated {n} samples (gap_rate={spec.gap_rate}, observed gap={disagreement:.3f})")
    return samples
