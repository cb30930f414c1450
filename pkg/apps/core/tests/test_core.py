"""
Tests for the error envelope and config-file reading.
"""

import pytest

from apps.core.commands import read_config_file
from apps.core.exceptions import (
    ConfigError,
    DataError,
    MalformedRecordError,
    ParameterError,
    error_payload,
    first_error_field,
    get_error_message,
)


class TestErrorPayload:
    def test_lab_errors_carry_their_exit_code(self):
        payload = error_payload(DataError('dataset not found: x.jsonl', details={'path': 'x.jsonl'}))
        assert payload == {
            'success': False,
            'error': {'code': 3, 'message': 'dataset not found: x.jsonl', 'details': {'path': 'x.jsonl'}},
        }

    def test_parameter_errors_are_configuration_errors(self):
        assert error_payload(ParameterError('folds must be >= 2'))['error']['code'] == 2
        assert isinstance(ParameterError('x'), ValueError)

    def test_other_exceptions(self):
        assert error_payload(RuntimeError('boom'))['error'] == {'code': 1, 'message': 'boom', 'details': {}}

    def test_malformed_records_name_line_and_field(self):
        error = MalformedRecordError(7, 'labels.er_fine', 'not a valid choice')
        assert error.message == "line 7: field 'labels.er_fine': not a valid choice"
        assert error.details == {'line': 7, 'field': 'labels.er_fine'}


class TestSerializerMessages:
    def test_nested_errors_are_flattened(self):
        errors = {'labels': {'er_valence': ['Ensure this value is less than or equal to 1.0.']}}
        assert get_error_message(errors) == 'labels.er_valence: Ensure this value is less than or equal to 1.0.'
        assert first_error_field(errors) == 'labels.er_valence'

    def test_non_field_errors(self):
        assert get_error_message(['shape mismatch']) == 'shape mismatch'
        assert first_error_field([]) == 'non_field_errors'


class TestReadConfigFile:
    def test_keys_are_lower_cased(self, tmp_path):
        path = tmp_path / 'lab.env'
        path.write_text('# experiment\nPROTOCOL=fer7\nALPHA_ADV=0.5\nMODALITY_MASK=F,E\n')
        assert read_config_file(str(path)) == {'protocol': 'fer7', 'alpha_adv': '0.5', 'modality_mask': 'F,E'}

    def test_no_path_means_no_settings(self):
        assert read_config_file(None) == {}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            read_config_file(str(tmp_path / 'missing.env'))
        assert excinfo.value.exit_code == 2
