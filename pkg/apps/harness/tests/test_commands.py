"""
Tests for the management commands and their exit codes.
"""

import json
from io import StringIO

import numpy as np
import pandas as pd
import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from apps.datamodel.io import load_dataset
from apps.harness.models import ExperimentRun


def run(*args):
    stdout, stderr = StringIO(), StringIO()
    call_command(*args, stdout=stdout, stderr=stderr)
    return stdout.getvalue()


def failing(*args):
    stderr = StringIO()
    with pytest.raises(CommandError) as excinfo:
        call_command(*args, stdout=StringIO(), stderr=stderr)
    return excinfo.value, stderr.getvalue()


class TestGenerate:
    def test_writes_a_seeded_dataset(self, lab_output):
        run('generate', '--n', '10', '--gap-rate', '0.5', '--seed', '4')
        first = load_dataset(lab_output / 'dataset.jsonl')
        run('generate', '--n', '10', '--gap-rate', '0.5', '--seed', '4', '--name', 'again.jsonl')
        second = load_dataset(lab_output / 'again.jsonl')
        assert len(first) == 10
        assert [s.labels for s in first] == [s.labels for s in second]
        assert np.array_equal(first[3].face_seq, second[3].face_seq)


class TestCrossValidationCommand:
    def test_writes_csv_and_summary(self, lab_output, tiny_dataset_path, tiny_config_file):
        output = run(
            'cv', '--dataset', str(tiny_dataset_path), '--config', str(tiny_config_file), '--folds', '2',
        )
        frame = pd.read_csv(lab_output / 'cv.csv')
        assert len(frame) == 1
        assert {'mean_war', 'std_war', 'fold0_war', 'fold1_war'} <= set(frame.columns)
        assert frame.loc[0, 'protocol'] == 'er3'
        assert 'macro' in (lab_output / 'cv.txt').read_text()
        assert 'cv.csv' in output

    def test_flags_override_the_config_file(self, lab_output, tiny_dataset_path, tiny_config_file):
        run(
            'cv', '--dataset', str(tiny_dataset_path), '--config', str(tiny_config_file), '--folds', '2',
            '--protocol', 'fer_va', '--modules', 'baseline', '--modalities', 'F',
        )
        frame = pd.read_csv(lab_output / 'cv.csv')
        assert frame.loc[0, 'protocol'] == 'fer_va'
        assert frame.loc[0, 'modules'] == 'baseline'
        assert 'mean_rmse' in frame.columns

    def test_missing_dataset_exits_with_a_data_error(self, lab_output, tmp_path):
        error, stderr = failing('cv', '--dataset', str(tmp_path / 'nope.jsonl'), '--folds', '2')
        assert error.returncode == 3
        assert json.loads(stderr)['error']['message'] == 'dataset not found: ' + str(tmp_path / 'nope.jsonl')

    def test_unknown_protocol_exits_with_a_config_error(self, lab_output, tiny_dataset_path):
        error, _ = failing('cv', '--dataset', str(tiny_dataset_path), '--protocol', 'er5')
        assert error.returncode == 2

    def test_missing_config_file(self, lab_output, tiny_dataset_path, tmp_path):
        error, _ = failing('cv', '--dataset', str(tiny_dataset_path), '--config', str(tmp_path / 'none.env'))
        assert error.returncode == 2

    def test_bad_config_value(self, lab_output, tiny_dataset_path, tmp_path):
        config = tmp_path / 'bad.env'
        config.write_text('PROTOCOL=er3\nALPHA_ADV=-1\n')
        error, _ = failing('cv', '--dataset', str(tiny_dataset_path), '--config', str(config))
        assert error.returncode == 2


class TestTrainAndEval:
    def test_checkpoint_scores_its_held_out_fold(self, lab_output, tiny_dataset_path, tiny_config_file):
        run(
            'train', '--dataset', str(tiny_dataset_path), '--config', str(tiny_config_file),
            '--folds', '2', '--fold', '0', '--validate',
        )
        assert (lab_output / 'model.npz').is_file()
        log = pd.read_csv(lab_output / 'training_log.csv')
        assert len(log) == 1

        run('eval', '--checkpoint', str(lab_output / 'model.npz'), '--dataset', str(tiny_dataset_path))
        report = json.loads((lab_output / 'eval.json').read_text())
        assert report['samples'] == 6
        assert set(report['scores']) == {'er', 'fer'}

        run('eval', '--checkpoint', str(lab_output / 'model.npz'), '--dataset', str(tiny_dataset_path), '--all')
        assert json.loads((lab_output / 'eval.json').read_text())['samples'] == 12

    def test_fold_out_of_range(self, lab_output, tiny_dataset_path, tiny_config_file):
        error, _ = failing(
            'train', '--dataset', str(tiny_dataset_path), '--config', str(tiny_config_file),
            '--folds', '2', '--fold', '2',
        )
        assert error.returncode == 2

    def test_missing_checkpoint(self, lab_output, tiny_dataset_path, tmp_path):
        error, _ = failing('eval', '--checkpoint', str(tmp_path / 'none.npz'), '--dataset', str(tiny_dataset_path))
        assert error.returncode == 3


class TestPreprocess:
    def test_simulated_stream(self, lab_output):
        run('preprocess', '--target-len', '16', '--fixation-len', '8')
        features = np.load(lab_output / 'eye_features.npz')
        assert features['eyemove'].shape == (16, 9)
        assert features['fixation'].shape[0] == 8
        assert (lab_output / 'cleaned_stream.csv').is_file()
        assert 'blinks' in json.loads((lab_output / 'preprocess_report.json').read_text())

    def test_missing_stream(self, lab_output, tmp_path):
        error, _ = failing('preprocess', '--input', str(tmp_path / 'raw.csv'))
        assert error.returncode == 3


class TestAnnotate:
    def test_simulated_panel(self, lab_output, tiny_dataset_path):
        run('annotate', '--dataset', str(tiny_dataset_path), '--experts', '3')
        assert (lab_output / 'bundles.jsonl').is_file()
        report = json.loads((lab_output / 'ala.json').read_text())
        assert len(report['fused']) == 12
        assert report['accepted'] + report['contested'] == 12
        assert (lab_output / 'annotation_consistency.csv').is_file()

    def test_needs_a_source(self, lab_output):
        error, _ = failing('annotate')
        assert error.returncode == 2


class TestPlot:
    def test_nothing_to_plot(self, lab_output):
        error, _ = failing('plot')
        assert error.returncode == 3

    def test_correlation_plot(self, lab_output, tiny_dataset_path):
        run('correlate', '--dataset', str(tiny_dataset_path))
        assert len(pd.read_csv(lab_output / 'correlation.csv')) == 14
        run('plot', '--kind', 'correlation')
        assert (lab_output / 'correlation.png').stat().st_size > 0


@pytest.mark.django_db
def test_runs_are_recorded_when_enabled(lab_output, settings, tiny_dataset_path, tiny_config_file):
    settings.LAB_RECORD_RUNS = True
    run('cv', '--dataset', str(tiny_dataset_path), '--config', str(tiny_config_file), '--folds', '2')
    recorded = ExperimentRun.objects.get()
    assert recorded.kind == ExperimentRun.Kind.CROSS_VALIDATION
    assert recorded.protocol == 'er3'
    assert recorded.output_path.endswith('cv.csv')
    assert len(recorded.report['rows']) == 1
