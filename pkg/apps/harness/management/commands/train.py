"""
Train one EMERT model and save a checkpoint.
"""

from apps.core.exceptions import ParameterError
from apps.datamodel.splits import kfold_split
from apps.emert.checkpoint import save_checkpoint
from apps.emert.training import train
from apps.harness.cli import ExperimentCommand
from apps.harness.reporting import record_run
from apps.harness.specs import dims_of


class Command(ExperimentCommand):
    help = 'Train a model on the whole dataset or on the training part of one fold'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--fold', type=int, default=None, help='Hold out this fold of the spec split')
        parser.add_argument('--validate', action='store_true', help='Log held-out scores every epoch (needs --fold)')

    def run(self, **options):
        samples, spec = self.load(options)
        cfg = spec.model_config(dims_of(samples))
        fold = options['fold']
        test_ids = []
        training, validation = samples, None
        if fold is not None:
            if not 0 <= fold < spec.folds:
                raise ParameterError(f"--fold must lie in [0, {spec.folds}), got {fold}")
            split = kfold_split(samples, k=spec.folds, seed=spec.seed)
            test_ids = split.test_ids(fold)
            held_out = set(test_ids)
            training = [s for s in samples if s.sample_id not in held_out]
            if options['validate']:
                validation = [s for s in samples if s.sample_id in held_out]

        result = train(training, cfg, seed=spec.seed, validation=validation, dump_dir=self.out_dir / 'dumps')
        path = save_checkpoint(
            result.model,
            self.out_dir / 'model.npz',
            extra={'spec': spec.to_dict(), 'fold': fold, 'test_ids': test_ids},
        )
        result.log.save_csv(self.out_dir / 'training_log.csv')
        record_run('train', {'final_epoch': result.log.last}, spec=spec, output_path=path)
        self.stdout.write(self.style.SUCCESS(f"Saved {path} (final loss {result.log.last.get('loss'):.4f})"))
