"""
Tests for fold execution and cross-validation.
"""

import math

import pytest

from apps.core.exceptions import ConfigError, ContractError, EmptyInputError, ParameterError
from apps.datamodel.splits import kfold_split
from apps.emert.training import TrainResult
from apps.harness import runner
from apps.harness.runner import FoldResult, cross_validate, run_cv, run_fold

from .factories import ExperimentSpecFactory


class TestRunFold:
    def test_fold_sizes_and_scores(self, tiny_dataset):
        spec = ExperimentSpecFactory()
        split = kfold_split(tiny_dataset, k=2, seed=0)
        result = run_fold(spec, tiny_dataset, split, 0)
        assert result.n_train + result.n_test == len(tiny_dataset)
        assert result.n_test == len(split.test_ids(0))
        assert set(result.metrics) == {'war', 'uar', 'f1'}
        assert all(0.0 <= value <= 1.0 for value in result.metrics.values())
        assert set(result.heads) == {'er', 'fer'}
        assert 0.0 <= result.disc_acc_generic <= 1.0

    def test_zero_variance_matches_the_clean_scores(self, tiny_dataset):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        result = run_fold(ExperimentSpecFactory(), tiny_dataset, split, 1, variances=[0.0, 0.1])
        assert result.noisy_metrics(0.0) == result.metrics
        assert [entry['variance'] for entry in result.noisy] == [0.0, 0.1]

    def test_negative_variance_is_rejected(self, tiny_dataset):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        with pytest.raises(ParameterError):
            run_fold(ExperimentSpecFactory(), tiny_dataset, split, 0, variances=[0.01, -0.01])

    def test_single_task_scores_one_head(self, tiny_dataset):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        result = run_fold(ExperimentSpecFactory(protocol='fer3', multitask=False), tiny_dataset, split, 0)
        assert set(result.heads) == {'fer'}

    def test_baseline_has_no_discriminator_accuracy(self, tiny_dataset):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        result = run_fold(ExperimentSpecFactory(module_mask=()), tiny_dataset, split, 0, probe=True)
        assert math.isnan(result.disc_acc_generic)
        assert result.probe is None

    def test_probe_runs_on_the_held_out_fold(self, tiny_dataset):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        result = run_fold(ExperimentSpecFactory(), tiny_dataset, split, 0, probe=True)
        assert result.probe['test_vectors'] == (result.n_test - result.n_test // 2) * 3

    def test_test_samples_reaching_training_is_a_contract_error(self, tiny_dataset, monkeypatch):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        real_train = runner.train

        def leaky_train(samples, cfg, seed=0, **kwargs):
            result = real_train(samples, cfg, seed=seed, **kwargs)
            return TrainResult(model=result.model, log=result.log, seen_ids=result.seen_ids + split.test_ids(0)[:1])

        monkeypatch.setattr(runner, 'train', leaky_train)
        with pytest.raises(ContractError):
            run_fold(ExperimentSpecFactory(), tiny_dataset, split, 0)

    def test_training_batches_never_see_the_held_out_fold(self, tiny_dataset, monkeypatch):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        seen = []
        real_train = runner.train

        def recording_train(samples, cfg, seed=0, **kwargs):
            result = real_train(samples, cfg, seed=seed, **kwargs)
            seen.extend(result.seen_ids)
            return result

        monkeypatch.setattr(runner, 'train', recording_train)
        run_fold(ExperimentSpecFactory(), tiny_dataset, split, 1)
        assert sorted(seen) == split.train_ids(1)

    def test_result_survives_a_dict_round_trip(self, tiny_dataset):
        split = kfold_split(tiny_dataset, k=2, seed=0)
        result = run_fold(ExperimentSpecFactory(), tiny_dataset, split, 0, variances=[0.05])
        assert FoldResult.from_dict(result.to_dict()).metrics == result.metrics


class TestCrossValidation:
    def test_row_has_one_entry_per_fold(self, tiny_dataset):
        row = run_cv(ExperimentSpecFactory(folds=3), tiny_dataset)
        assert len(row.fold_metrics) == 3
        assert set(row.mean) == {'war', 'uar', 'f1'}
        assert 'train_war' in row.extra
        assert row.extra['parameters'] > 0

    def test_face_only_scores_stay_in_range(self, tiny_dataset):
        row = run_cv(ExperimentSpecFactory(modality_mask=('F',)), tiny_dataset)
        for metrics in row.fold_metrics:
            assert all(0.0 <= value <= 1.0 for value in metrics.values())

    def test_identical_seeds_give_identical_rows(self, tiny_dataset):
        first = run_cv(ExperimentSpecFactory(), tiny_dataset)
        second = run_cv(ExperimentSpecFactory(), tiny_dataset)
        assert first.fold_metrics == second.fold_metrics
        assert first.mean == second.mean

    def test_regression_protocol(self, tiny_dataset):
        row = run_cv(ExperimentSpecFactory(protocol='er_va'), tiny_dataset)
        assert set(row.mean) == {'mae', 'mse', 'rmse'}
        assert row.mean['rmse'] == pytest.approx(
            sum(m['rmse'] for m in row.fold_metrics) / len(row.fold_metrics)
        )

    def test_thread_pool_matches_serial(self, tiny_dataset):
        spec = ExperimentSpecFactory()
        serial = cross_validate(spec, tiny_dataset, executor='serial')
        threaded = cross_validate(spec, tiny_dataset, executor='threads', threads=2)
        assert [f.fold for f in threaded] == [0, 1]
        assert [f.metrics for f in threaded] == [f.metrics for f in serial]

    def test_celery_group_matches_serial(self, tiny_dataset, tiny_dataset_path):
        spec = ExperimentSpecFactory()
        serial = cross_validate(spec, tiny_dataset, executor='serial')
        dispatched = cross_validate(spec, tiny_dataset, executor='celery', dataset_path=tiny_dataset_path)
        assert [f.metrics for f in dispatched] == [f.metrics for f in serial]

    def test_celery_needs_a_dataset_path(self, tiny_dataset):
        with pytest.raises(ConfigError):
            cross_validate(ExperimentSpecFactory(), tiny_dataset, executor='celery')

    def test_unknown_executor(self, tiny_dataset):
        with pytest.raises(ConfigError):
            cross_validate(ExperimentSpecFactory(), tiny_dataset, executor='mpi')

    def test_empty_dataset(self):
        with pytest.raises(EmptyInputError):
            run_cv(ExperimentSpecFactory(), [])

    def test_more_folds_than_samples(self, tiny_dataset):
        with pytest.raises(ParameterError):
            run_cv(ExperimentSpecFactory(folds=20), tiny_dataset)
