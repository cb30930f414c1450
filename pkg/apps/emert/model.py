"""
The EMERT model: modality encoders, adversarial feature decoupling,
cross-attention fusion and the ER/FER prediction heads.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from apps.core.exceptions import DimensionError
from apps.datamodel.types import MODALITIES, LabelSet, MultimodalSample
from apps.diffkernel import ops
from apps.diffkernel.module import Module
from apps.diffkernel.tensor import DiffNode, constant, no_grad
from .config import TASK_OUTPUTS, ModelConfig, is_classification
from .layers import LSTM, MLP, AttentionBlock, Linear, TemporalConvStack

logger = logging.getLogger(__name__)

INPUT_FIELDS = {'F': 'face', 'E': 'eyemove', 'G': 'fixation'}

# Legal ranges applied to regression outputs at evaluation time only
REGRESSION_RANGES = {'regress_va': (-1.0, 1.0), 'regress_intensity': (0.0, 3.0)}


@dataclass
class Batch:
    """Stacked inputs of several samples, (batch, time, channels) per modality."""
    sample_ids: List[str]
    face: np.ndarray
    eyemove: np.ndarray
    fixation: np.ndarray
    labels: List[LabelSet]

    def __len__(self):
        return len(self.sample_ids)

    def modality(self, key: str) -> np.ndarray:
        return getattr(self, INPUT_FIELDS[key])


@dataclass
class DecoupledFeatures:
    """F_C and F_P as (batch, modality, width) nodes in F, E, G order."""
    generic: DiffNode
    unique: DiffNode


@dataclass
class Prediction:
    er_out: Optional[DiffNode] = None
    fer_out: Optional[DiffNode] = None


@dataclass
class ForwardOutput:
    encoded: Dict[str, DiffNode]
    features: Optional[DecoupledFeatures]
    fused: DiffNode
    prediction: Prediction
    generic_logits: Optional[DiffNode] = None
    unique_logits: Optional[DiffNode] = None


def make_batch(
    samples: Sequence[MultimodalSample],
    cfg: ModelConfig,
    noise_variance: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Batch:
    """
    Stack samples into a batch.

    Zero-mean Gaussian noise of the given variance is added to every
    modality, one fresh draw per sample. Modalities outside
    cfg.modality_mask and eye channels outside cfg.eye_channel_mask are
    then replaced by zeros.
    """
    if not samples:
        raise DimensionError("cannot build a batch from no samples")
    arrays = {}
    for key, field_name in INPUT_FIELDS.items():
        try:
            arrays[key] = np.stack([sample.modality(key) for sample in samples]).astype(np.float64)
        except ValueError as exc:
            raise DimensionError(f"{field_name} sequences have inconsistent shapes") from exc

    if noise_variance > 0:
        rng = rng or np.random.default_rng(0)
        std = np.sqrt(noise_variance)
        for index in range(len(samples)):
            for key in MODALITIES:
                arrays[key][index] += rng.normal(scale=std, size=arrays[key][index].shape)

    for key in MODALITIES:
        if key not in cfg.modality_mask:
            arrays[key] = np.zeros_like(arrays[key])
    if cfg.eye_channel_mask is not None:
        dropped = [c for c in range(arrays['E'].shape[-1]) if c not in cfg.eye_channel_mask]
        arrays['E'][..., dropped] = 0.0

    return Batch(
        sample_ids=[sample.sample_id for sample in samples],
        face=arrays['F'],
        eyemove=arrays['E'],
        fixation=arrays['G'],
        labels=[sample.labels for sample in samples],
    )


def discriminate(generic: DiffNode, unique: DiffNode, discriminator: MLP, grl_lambda: float):
    """
    Discriminator logits for F_C (seen through gradient reversal) and F_P.
    """
    return discriminator(ops.grad_reverse(generic, grl_lambda)), discriminator(unique)


class EmertModel(Module):
    """
    Encoders project every modality to width S. With MAFD or EMT enabled,
    pooled encodings are split into emotion-generic (shared MLP) and
    emotion-unique (per-modality MLP) vectors. EMT fuses them by
    cross-attention with F_C as queries and F_P as keys and values;
    otherwise a self-attention transformer runs over the concatenated tokens.
    """

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.config = cfg
        self.seed = seed
        rng = np.random.default_rng(seed)
        width = cfg.shared_width
        dims = cfg.dims

        self.face_encoder = TemporalConvStack(rng, dims.face_channels, cfg.face_hidden, cfg.face_kernel)
        self.face_projection = Linear(rng, cfg.face_hidden, width)
        self.eye_encoder = LSTM(rng, dims.eye_channels, cfg.eye_hidden)
        self.eye_projection = Linear(rng, cfg.eye_hidden, width)
        self.fixation_encoder = LSTM(rng, dims.fixation_channels, cfg.fixation_hidden)
        self.fixation_projection = Linear(rng, cfg.fixation_hidden, width)

        if self.has_extractors:
            self.generic_extractor = MLP(rng, width, width, width)
            self.unique_extractors = {key: MLP(rng, width, width, width) for key in MODALITIES}
        if cfg.use_mafd:
            self.discriminator = MLP(rng, width, width, cfg.discriminator_classes)

        self.fusion = [AttentionBlock(rng, width, cfg.heads, cfg.ff_width) for _ in range(cfg.layers)]

        # Both heads always exist; a disabled head is left out of the graph
        self.er_head = MLP(rng, width, width, TASK_OUTPUTS[cfg.er_task])
        self.fer_head = MLP(rng, width, width, TASK_OUTPUTS[cfg.fer_task])
        logger.debug(f"Built EMERT model with {self.parameter_count()} parameters (seed {seed})")

    @property
    def has_extractors(self) -> bool:
        return self.config.use_mafd or self.config.use_emt

    def encode(self, batch: Batch) -> Dict[str, DiffNode]:
        """
        (batch, T_m, S) encodings per modality; masked modalities are zeros
        and keep their encoder out of the graph.
        """
        cfg = self.config
        dims = cfg.dims
        expected = {
            'F': (dims.face_frames, dims.face_channels),
            'E': (dims.eye_frames, dims.eye_channels),
            'G': (dims.fixation_frames, dims.fixation_channels),
        }
        encoders = {
            'F': lambda x: self.face_projection(self.face_encoder(x)),
            'E': lambda x: self.eye_projection(self.eye_encoder(x)),
            'G': lambda x: self.fixation_projection(self.fixation_encoder(x)),
        }
        encoded = {}
        for key in MODALITIES:
            values = batch.modality(key)
            if values.shape[1:] != expected[key]:
                raise DimensionError(
                    f"{INPUT_FIELDS[key]} input has shape {values.shape[1:]}, expected {expected[key]}"
                )
            if key in cfg.modality_mask:
                encoded[key] = encoders[key](constant(values))
            else:
                encoded[key] = constant(np.zeros((len(batch), values.shape[1], cfg.shared_width)))
        return encoded

    def decouple(self, encoded: Dict[str, DiffNode]) -> DecoupledFeatures:
        pooled = {key: ops.mean(encoded[key], axis=1) for key in MODALITIES}
        generic = ops.stack([self.generic_extractor(pooled[key]) for key in MODALITIES], axis=1)
        unique = ops.stack([self.unique_extractors[key](pooled[key]) for key in MODALITIES], axis=1)
        return DecoupledFeatures(generic=generic, unique=unique)

    def fuse(self, encoded: Dict[str, DiffNode], features: Optional[DecoupledFeatures]) -> DiffNode:
        """Fusion vector X_fu of shape (batch, S)."""
        if self.config.use_emt:
            x, context = features.generic, features.unique
            for block in self.fusion:
                x = block(x, context)
        else:
            if features is not None:
                x = ops.concat([features.generic, features.unique], axis=1)
            else:
                x = ops.concat([encoded[key] for key in MODALITIES], axis=1)
            for block in self.fusion:
                x = block(x, x)
        return ops.mean(x, axis=1)

    def heads(self, fused: DiffNode) -> Prediction:
        return Prediction(
            er_out=self.er_head(fused) if self.config.use_er_head else None,
            fer_out=self.fer_head(fused) if self.config.use_fer_head else None,
        )

    def forward(self, batch: Batch) -> ForwardOutput:
        encoded = self.encode(batch)
        features = self.decouple(encoded) if self.has_extractors else None
        fused = self.fuse(encoded, features)
        output = ForwardOutput(encoded=encoded, features=features, fused=fused, prediction=self.heads(fused))
        if self.config.use_mafd:
            output.generic_logits, output.unique_logits = discriminate(
                features.generic, features.unique, self.discriminator, self.config.grl_lambda
            )
        return output

    __call__ = forward

    def predict(self, batch: Batch) -> Dict[str, np.ndarray]:
        """
        Evaluation outputs per enabled head: class indices for classification
        tasks, regression values clamped to their legal range otherwise.
        """
        with no_grad():
            prediction = self.forward(batch).prediction
        results = {}
        for view, node, task in (
            ('er', prediction.er_out, self.config.er_task),
            ('fer', prediction.fer_out, self.config.fer_task),
        ):
            if node is None:
                continue
            if is_classification(task):
                results[view] = np.argmax(node.value, axis=1)
            else:
                low, high = REGRESSION_RANGES[task]
                results[view] = np.clip(node.value, low, high)
        return results
