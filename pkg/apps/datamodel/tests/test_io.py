"""
Tests for JSONL dataset persistence.
"""

import json

import numpy as np
import pytest

from apps.core.exceptions import LabelRangeError, MalformedRecordError
from apps.datamodel.io import load_dataset, sample_to_record, save_dataset

from .factories import MultimodalSampleFactory


def test_round_trip_is_exact(tmp_path):
    samples = MultimodalSampleFactory.build_batch(3)
    path = tmp_path / 'dataset.jsonl'
    save_dataset(samples, path)
    loaded = load_dataset(path)
    assert loaded == samples
    assert np.array_equal(loaded[0].face_seq, samples[0].face_seq)


def test_empty_file_is_empty_dataset(tmp_path):
    path = tmp_path / 'empty.jsonl'
    path.write_text('')
    assert load_dataset(path) == []


def test_out_of_range_valence_is_named(tmp_path):
    record = sample_to_record(MultimodalSampleFactory())
    record['labels']['er_valence'] = 1.5
    path = tmp_path / 'bad.jsonl'
    path.write_text(json.dumps(record) + '\n')
    with pytest.raises(LabelRangeError) as excinfo:
        load_dataset(path)
    assert excinfo.value.field == 'er_valence'
    assert 'er_valence' in str(excinfo.value)


def test_malformed_record_reports_line_and_field(tmp_path):
    good = sample_to_record(MultimodalSampleFactory())
    bad = sample_to_record(MultimodalSampleFactory())
    bad['eyemove'] = bad['eyemove'][:-1]
    path = tmp_path / 'bad.jsonl'
    path.write_text(json.dumps(good) + '\n' + json.dumps(bad) + '\n')
    with pytest.raises(MalformedRecordError) as excinfo:
        load_dataset(path)
    assert excinfo.value.line_number == 2
    assert excinfo.value.field == 'eyemove'


def test_invalid_json_is_malformed(tmp_path):
    path = tmp_path / 'broken.jsonl'
    path.write_text('{"sample_id": \n')
    with pytest.raises(MalformedRecordError) as excinfo:
        load_dataset(path)
    assert excinfo.value.line_number == 1


def test_non_finite_values_are_rejected(tmp_path):
    record = sample_to_record(MultimodalSampleFactory())
    record['face'][0] = float('nan')
    path = tmp_path / 'nan.jsonl'
    path.write_text(json.dumps(record) + '\n')
    with pytest.raises(MalformedRecordError) as excinfo:
        load_dataset(path)
    assert excinfo.value.field == 'face'
