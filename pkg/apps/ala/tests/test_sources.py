"""
Tests for machine labelers, simulated panels and bundle persistence.
"""

import json

import pytest

from apps.ala.io import load_bundles, save_bundles
from apps.ala.sources import (
    FileMachineLabeler,
    SimulatedMachineLabeler,
    get_machine_labeler,
    simulate_bundles,
)
from apps.ala.types import AnnotationBundle
from apps.core.exceptions import ConfigError, DataError, MalformedRecordError, ParameterError
from apps.datamodel.synthetic import generate_synthetic
from apps.datamodel.types import GapSpec, SequenceDims

TINY = SequenceDims(face_frames=2, eye_frames=2, fixation_frames=2)


@pytest.fixture
def samples():
    return generate_synthetic(60, GapSpec(seed=5), dims=TINY)


class TestMachineLabelers:
    def test_perfect_simulated_labeler_copies_fer(self, samples):
        labeler = SimulatedMachineLabeler(accuracy=1.0)
        for sample in samples:
            assert labeler.label(sample) == sample.labels.class_index('fer', 'fine')
            assert labeler.label(sample, 'coarse') == sample.labels.class_index('fer', 'coarse')

    def test_simulated_labels_are_deterministic(self, samples):
        first = [SimulatedMachineLabeler(accuracy=0.5, seed=3).label(s) for s in samples]
        second = [SimulatedMachineLabeler(accuracy=0.5, seed=3).label(s) for s in samples]
        assert first == second

    def test_ratings_stay_in_range(self, samples):
        labeler = SimulatedMachineLabeler(rating_noise=2.0)
        for sample in samples:
            valence, arousal = labeler.rate(sample)
            assert -1.0 <= valence <= 1.0 and -1.0 <= arousal <= 1.0

    def test_invalid_accuracy(self):
        with pytest.raises(ParameterError):
            SimulatedMachineLabeler(accuracy=1.5)

    def test_file_labeler(self, tmp_path, samples):
        path = tmp_path / 'machine.jsonl'
        path.write_text(
            json.dumps({'item_id': samples[0].sample_id, 'label': 4, 'valence': 0.2, 'arousal': -0.1}) + '\n'
            + json.dumps({'item_id': samples[1].sample_id, 'label': None}) + '\n'
        )
        labeler = FileMachineLabeler(str(path))
        assert labeler.label(samples[0]) == 4
        assert labeler.rate(samples[0]) == (0.2, -0.1)
        assert labeler.label(samples[1]) is None
        assert labeler.label(samples[2]) is None

    def test_file_labeler_reports_bad_lines(self, tmp_path):
        path = tmp_path / 'machine.jsonl'
        path.write_text('{"item_id": "a", "label": 1}\n{"label": 2}\n')
        with pytest.raises(MalformedRecordError) as excinfo:
            FileMachineLabeler(str(path))
        assert excinfo.value.line_number == 2

    def test_factory_uses_settings(self, settings, tmp_path):
        settings.ALA_MACHINE_LABELER = 'simulated'
        assert isinstance(get_machine_labeler(seed=1), SimulatedMachineLabeler)

        settings.ALA_MACHINE_LABELER = 'file'
        settings.ALA_MACHINE_LABEL_FILE = ''
        with pytest.raises(ConfigError):
            get_machine_labeler()

        settings.ALA_MACHINE_LABELER = 'oracle'
        with pytest.raises(ConfigError):
            get_machine_labeler()


class TestSimulateBundles:
    def test_experts_only_see_contested_items(self, samples):
        bundles, er_labels = simulate_bundles(samples, seed=2)
        assert len(bundles) == len(samples)
        for bundle in bundles:
            contested = bundle.machine_label != er_labels[bundle.item_id]
            assert bool(bundle.expert_labels) == contested
            if contested:
                assert [a for a, _ in bundle.expert_labels] == ['expert_1', 'expert_2', 'expert_3', 'expert_4']
                assert set(bundle.ratings) == {'machine', 'expert_1', 'expert_2', 'expert_3', 'expert_4'}

    def test_experts_on_all(self, samples):
        bundles, _ = simulate_bundles(samples, n_experts=2, experts_on_all=True)
        assert all(len(bundle.expert_labels) == 2 for bundle in bundles)

    def test_coarse_granularity(self, samples):
        bundles, er_labels = simulate_bundles(samples, granularity='coarse')
        assert all(bundle.class_count == 3 for bundle in bundles)
        assert set(er_labels.values()) <= {0, 1, 2}

    def test_deterministic(self, samples):
        first, _ = simulate_bundles(samples, seed=4)
        second, _ = simulate_bundles(samples, seed=4)
        assert [b.to_dict() for b in first] == [b.to_dict() for b in second]


class TestBundleIO:
    def test_round_trip(self, tmp_path, samples):
        bundles, er_labels = simulate_bundles(samples, seed=1)
        path = tmp_path / 'bundles.jsonl'
        save_bundles(bundles, path, er_labels)
        loaded, loaded_er = load_bundles(path)
        assert [b.to_dict() for b in loaded] == [b.to_dict() for b in bundles]
        assert loaded_er == er_labels

    def test_out_of_range_label(self, tmp_path):
        path = tmp_path / 'bundles.jsonl'
        path.write_text(
            json.dumps(AnnotationBundle('a', 3, machine_label=1).to_dict()) + '\n'
            + json.dumps({'item_id': 'b', 'class_count': 3, 'machine_label': 5}) + '\n'
        )
        with pytest.raises(MalformedRecordError) as excinfo:
            load_bundles(path)
        assert excinfo.value.line_number == 2
        assert excinfo.value.field == 'machine_label'

    def test_bundle_without_labels(self, tmp_path):
        path = tmp_path / 'bundles.jsonl'
        path.write_text(json.dumps({'item_id': 'a', 'class_count': 3}) + '\n')
        with pytest.raises(MalformedRecordError):
            load_bundles(path)

    def test_duplicate_annotator_is_rejected(self):
        with pytest.raises(DataError):
            AnnotationBundle('a', 3, expert_labels=[('e1', 0), ('e1', 1)])
