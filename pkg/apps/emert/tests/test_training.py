"""
Tests for losses, training, evaluation, checkpoints and probes.
"""

import numpy as np
import pandas as pd
import pytest

from apps.core.exceptions import ContractError, TrainingDivergedError
from apps.datamodel.synthetic import generate_synthetic
from apps.datamodel.types import GapSpec
from apps.diffkernel import ops
from apps.diffkernel.tensor import constant
from apps.emert.checkpoint import load_checkpoint, save_checkpoint
from apps.emert.config import ModelConfig
from apps.emert.evaluation import evaluate
from apps.emert.losses import task_loss, task_losses, total_loss
from apps.emert.model import EmertModel, Prediction, make_batch
from apps.emert.probes import probe_decoupling
from apps.emert.training import LOG_COLUMNS, Trainer, train

from .helpers import tiny_config


class TestLosses:
    def test_total_loss_weights(self):
        cfg = ModelConfig(alpha_adv=0.3, beta_task=0.1)
        assert total_loss(1.0, 2.0, 3.0, cfg).item() == pytest.approx(0.8)

    def test_zero_beta_keeps_only_adversarial_term(self):
        cfg = ModelConfig(beta_task=0.0)
        assert total_loss(2.0, 5.0, 7.0, cfg).item() == pytest.approx(0.6)
        assert total_loss(2.0, 50.0, 70.0, cfg).item() == pytest.approx(0.6)

    def test_all_zero_components(self):
        assert total_loss(0.0, 0.0, 0.0, ModelConfig()).item() == 0.0

    def test_single_task_applies_beta_to_one_term(self):
        cfg = ModelConfig(alpha_adv=0.3, beta_task=0.1)
        assert total_loss(1.0, 2.0, None, cfg).item() == pytest.approx(0.5)

    def test_huber_branches(self):
        assert ops.huber(constant([[0.0]]), [[0.5]], 1.0).item() == pytest.approx(0.125)
        assert ops.huber(constant([[0.0]]), [[3.0]], 1.0).item() == pytest.approx(2.5)

    def test_confident_correct_logits_have_near_zero_loss(self, tiny_samples):
        labels = [tiny_samples[0].labels]
        index = labels[0].class_index('er', 'coarse')
        logits = np.full((1, 3), -50.0)
        logits[0, index] = 50.0
        assert task_loss(constant(logits), labels, 'classify3', 'er', 1.0).item() < 1e-12

    def test_cross_entropy_ignores_logit_shift(self, tiny_samples):
        labels = [s.labels for s in tiny_samples]
        logits = np.random.default_rng(0).normal(size=(len(labels), 7))
        base = task_loss(constant(logits), labels, 'classify7', 'fer', 1.0).item()
        shifted = task_loss(constant(logits + 123.4), labels, 'classify7', 'fer', 1.0).item()
        assert abs(base - shifted) < 1e-9

    def test_regression_targets_follow_the_view(self, tiny_samples):
        labels = [s.labels for s in tiny_samples[:2]]
        prediction = Prediction(er_out=constant(np.zeros((2, 2))), fer_out=constant(np.zeros((2, 1))))
        cfg = ModelConfig(er_task='regress_va', fer_task='regress_intensity')
        loss_e, loss_f = task_losses(prediction, labels, cfg)
        expected_f = np.mean([
            0.5 * l.fer_intensity ** 2 if l.fer_intensity <= 1 else l.fer_intensity - 0.5 for l in labels
        ])
        assert loss_f.item() == pytest.approx(expected_f)
        assert loss_e.item() == pytest.approx(np.mean([
            0.5 * (l.er_valence ** 2 + l.er_arousal ** 2) for l in labels
        ]))


class TestTraining:
    def test_zero_learning_rate_leaves_parameters_unchanged(self, tiny_samples):
        cfg = tiny_config(learning_rate=0.0)
        before = EmertModel(cfg, seed=3).state_dict()
        result = train(tiny_samples, cfg, seed=3)
        after = result.model.state_dict()
        assert all(np.array_equal(before[name], after[name]) for name in before)

    def test_same_seed_same_run(self, tiny_samples):
        cfg = tiny_config()
        first = train(tiny_samples, cfg, seed=4)
        second = train(tiny_samples, cfg, seed=4)
        pd.testing.assert_frame_equal(first.log.to_frame(), second.log.to_frame())
        for name, value in first.model.state_dict().items():
            assert np.array_equal(value, second.model.state_dict()[name])

    def test_log_columns(self, tiny_samples, tmp_path):
        cfg = tiny_config(epochs=3)
        result = train(tiny_samples[:6], cfg, seed=0, validation=tiny_samples[6:])
        frame = result.log.to_frame()
        assert list(frame.columns[:len(LOG_COLUMNS)]) == LOG_COLUMNS
        assert list(frame['epoch']) == [1, 2, 3]
        assert 'val_er_war' in frame.columns and 'val_fer_f1' in frame.columns
        assert frame['disc_acc_generic'].between(0, 1).all()
        path = tmp_path / 'log.csv'
        result.log.save_csv(path)
        assert list(pd.read_csv(path).columns) == list(frame.columns)

    def test_training_only_sees_given_samples(self, tiny_samples):
        result = train(tiny_samples[:5], tiny_config(), seed=0)
        assert result.seen_ids == sorted(s.sample_id for s in tiny_samples[:5])

    def test_single_task_log_has_no_fer_loss(self, tiny_samples):
        result = train(tiny_samples, tiny_config(use_fer_head=False), seed=0)
        assert result.log.to_frame()['loss_fer'].isna().all()

    def test_non_finite_loss_aborts_with_dump(self, tiny_samples, tmp_path):
        cfg = tiny_config()
        model = EmertModel(cfg)
        model.er_head.output.bias.value = np.full(3, np.inf)
        with pytest.raises(TrainingDivergedError) as excinfo:
            Trainer(cfg, seed=0, dump_dir=tmp_path).fit(tiny_samples, model=model)
        details = excinfo.value.details
        assert details['epoch'] == 1 and details['batch'] == 0
        assert len(details['sample_ids']) == cfg.batch_size
        assert list(tmp_path.glob('diverged_*.json'))


class TestEvaluation:
    def test_regression_outputs_are_clamped(self, tiny_samples):
        cfg = tiny_config(er_task='regress_va', fer_task='regress_intensity')
        model = EmertModel(cfg)
        model.er_head.output.bias.value = np.array([100.0, -100.0])
        model.fer_head.output.bias.value = np.array([-100.0])
        evaluation = evaluate(model, tiny_samples)
        assert evaluation.predictions['er'].max() <= 1.0
        assert evaluation.predictions['er'].min() >= -1.0
        assert np.all(evaluation.predictions['fer'] == 0.0)
        scores = evaluation.scores(cfg)
        assert set(scores['er']) == {'mae', 'mse', 'rmse'}

    def test_classification_scores_lie_in_unit_interval(self, tiny_samples):
        cfg = tiny_config()
        scores = evaluate(EmertModel(cfg), tiny_samples).scores(cfg)
        for view in ('er', 'fer'):
            assert all(0.0 <= value <= 1.0 for value in scores[view].values())

    def test_test_time_noise_changes_inputs_only_when_requested(self, tiny_samples):
        cfg = tiny_config()
        model = EmertModel(cfg)
        clean = evaluate(model, tiny_samples)
        silent = evaluate(model, tiny_samples, noise_variance=0.0, rng=np.random.default_rng(1))
        assert np.array_equal(clean.predictions['er'], silent.predictions['er'])


class TestCheckpoint:
    def test_round_trip(self, tiny_samples, tmp_path):
        cfg = tiny_config(modality_mask=('F', 'G'))
        model = train(tiny_samples, cfg, seed=2).model
        path = save_checkpoint(model, tmp_path / 'model', extra={'protocol': 'er3'})
        assert path.suffix == '.npz'
        restored, header = load_checkpoint(path)
        assert header['extra'] == {'protocol': 'er3'}
        assert restored.config == cfg
        for name, value in model.state_dict().items():
            assert np.array_equal(value, restored.state_dict()[name])
        batch = make_batch(tiny_samples, cfg)
        np.testing.assert_array_equal(model.predict(batch)['er'], restored.predict(batch)['er'])


class TestProbes:
    def test_probe_report(self, tiny_samples):
        model = EmertModel(tiny_config())
        report = probe_decoupling(model, tiny_samples, seed=0, epochs=2)
        assert 0.0 <= report.generic_accuracy <= 1.0
        assert 0.0 <= report.unique_accuracy <= 1.0
        assert report.train_vectors + report.test_vectors == 3 * len(tiny_samples)

    def test_baseline_cannot_be_probed(self, tiny_samples):
        with pytest.raises(ContractError):
            probe_decoupling(EmertModel(tiny_config(use_mafd=False, use_emt=False)), tiny_samples)


@pytest.mark.slow
def test_three_class_er_fits_the_training_split():
    samples = generate_synthetic(200, GapSpec(gap_rate=0.3, seed=0))
    cfg = ModelConfig.for_protocol('er3', epochs=100)
    model = train(samples, cfg, seed=0).model
    assert evaluate(model, samples).scores(cfg)['er']['war'] >= 0.90


@pytest.mark.slow
def test_adversarial_training_decouples_features():
    generic, unique = [], []
    for seed in range(3):
        samples = generate_synthetic(500, GapSpec(gap_rate=0.3, seed=seed))
        model = train(samples, ModelConfig(), seed=seed).model
        report = probe_decoupling(model, samples, seed=seed)
        generic.append(report.generic_accuracy)
        unique.append(report.unique_accuracy)
    assert np.mean(generic) <= 1 / 3 + 0.15
    assert np.mean(unique) >= 0.8
