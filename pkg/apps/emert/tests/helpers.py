"""
Tiny model settings shared by the emert tests.
"""

from apps.datamodel.types import SequenceDims
from apps.emert.config import ModelConfig

TINY_DIMS = SequenceDims(
    face_frames=3, eye_frames=3, fixation_frames=3,
    face_channels=3, eye_channels=9, fixation_channels=3,
)


def tiny_config(**overrides):
    values = dict(
        shared_width=4, face_hidden=3, eye_hidden=3, fixation_hidden=3,
        layers=1, heads=2, ff_width=4, batch_size=4, epochs=2, dims=TINY_DIMS,
    )
    values.update(overrides)
    return ModelConfig(**values)
