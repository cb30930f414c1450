"""
Tests for the synthetic generator and the label types.
"""

import numpy as np
import pytest

from apps.core.exceptions import LabelRangeError, ParameterError
from apps.datamodel.synthetic import gap_kernel, generate_synthetic
from apps.datamodel.types import FINE_CLASSES, GapSpec, LabelSet, SequenceDims, coarse_of

from .factories import LabelSetFactory


def test_zero_gap_copies_inner_emotion():
    samples = generate_synthetic(200, GapSpec(gap_rate=0.0, seed=1))
    assert all(s.labels.fer_fine == s.labels.er_fine for s in samples)


def test_full_gap_always_differs():
    samples = generate_synthetic(200, GapSpec(gap_rate=1.0, seed=2))
    assert all(s.labels.fer_fine != s.labels.er_fine for s in samples)


def test_empirical_gap_rate():
    samples = generate_synthetic(10000, GapSpec(gap_rate=0.3, seed=3), dims=SequenceDims(
        face_frames=2, eye_frames=2, fixation_frames=2
    ))
    rate = np.mean([s.labels.fer_fine != s.labels.er_fine for s in samples])
    assert abs(rate - 0.3) <= 0.02


def test_gap_kernel_prefers_masking_expressions():
    kernel = gap_kernel()
    np.testing.assert_allclose(kernel.sum(axis=1), 1.0)
    assert np.all(np.diag(kernel) == 0)
    sadness, neutral, anger = (FINE_CLASSES.index(c) for c in ('sadness', 'neutral', 'anger'))
    assert kernel[sadness, neutral] > kernel[sadness, anger]


def test_shapes_and_label_ranges():
    samples = generate_synthetic(50, GapSpec(seed=4))
    for sample in samples:
        assert sample.face_seq.shape == (8, 16)
        assert sample.eyemove_seq.shape == (32, 9)
        assert sample.fixation_seq.shape == (32, 16)
        assert -1.0 <= sample.labels.er_valence <= 1.0
        assert 0.0 <= sample.labels.fer_intensity <= 3.0
        assert sample.labels.er_coarse == coarse_of(sample.labels.er_fine)


def test_same_seed_reproduces_dataset():
    first = generate_synthetic(20, GapSpec(seed=9))
    second = generate_synthetic(20, GapSpec(seed=9))
    assert first == second


def test_invalid_inputs_are_rejected():
    with pytest.raises(ParameterError):
        generate_synthetic(0)
    with pytest.raises(ParameterError):
        GapSpec(class_priors=(0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.1))
    with pytest.raises(ParameterError):
        GapSpec(gap_rate=1.5)


def test_linear_probe_recovers_inner_emotion_from_eye_channels():
    samples = generate_synthetic(1000, GapSpec(gap_rate=0.3, seed=5))
    features = np.array([s.eyemove_seq.mean(axis=0) for s in samples])
    features = np.hstack([features, np.ones((len(samples), 1))])
    targets = np.array([s.labels.class_index('er', 'fine') for s in samples])
    onehot = np.eye(7)[targets]

    weights, *_ = np.linalg.lstsq(features[:700], onehot[:700], rcond=None)
    predicted = np.argmax(features[700:] @ weights, axis=1)
    accuracy = np.mean(predicted == targets[700:])
    assert accuracy >= 2.0 / 7.0


def test_surprise_maps_to_positive_by_default():
    assert coarse_of('surprise') == 'positive'


def test_surprise_mapping_is_configurable(settings):
    settings.DATAMODEL_SURPRISE_COARSE = 'negative'
    assert coarse_of('surprise') == 'negative'


def test_label_set_rejects_out_of_range_valence():
    with pytest.raises(LabelRangeError) as excinfo:
        LabelSetFactory(er_valence=1.5)
    assert excinfo.value.field == 'er_valence'


def test_label_set_rejects_inconsistent_coarse_label():
    with pytest.raises(LabelRangeError):
        LabelSetFactory(er_fine='happiness', er_coarse='negative')


def test_label_set_class_indices():
    labels = LabelSet.from_fine(
        'anger', 'neutral',
        er_valence=-0.7, er_arousal=0.7, fer_valence=0.0, fer_arousal=0.0, fer_intensity=0.2,
    )
    assert labels.class_index('er', 'fine') == FINE_CLASSES.index('anger')
    assert labels.class_index('er', 'coarse') == 1
    assert labels.class_index('fer', 'coarse') == 2
