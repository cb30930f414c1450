"""
Score a saved checkpoint on a dataset.
"""

import numpy as np

from apps.core.commands import LabCommand
from apps.core.exceptions import DataError, EmptyInputError, ParameterError
from apps.emert.checkpoint import load_checkpoint
from apps.emert.evaluation import evaluate
from apps.harness.cli import read_samples
from apps.harness.reporting import record_run, write_json
from apps.harness.specs import ExperimentSpec


class Command(LabCommand):
    help = 'Evaluate a checkpoint; defaults to the held-out fold it was trained without'

    def add_lab_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True, help='Checkpoint written by train')
        parser.add_argument('--dataset', required=True, help='JSONL dataset')
        parser.add_argument('--noise-variance', type=float, default=0.0, help='Test-time Gaussian noise variance')
        parser.add_argument('--all', action='store_true', help='Score every sample, not just the held-out fold')

    def run(self, **options):
        if options['noise_variance'] < 0:
            raise ParameterError(f"--noise-variance must be >= 0, got {options['noise_variance']}")
        try:
            model, header = load_checkpoint(options['checkpoint'])
        except FileNotFoundError as exc:
            raise DataError(f"checkpoint not found: {options['checkpoint']}") from exc
        samples = read_samples(options['dataset'])
        extra = header.get('extra', {})
        test_ids = set(extra.get('test_ids') or [])
        if test_ids and not options['all']:
            samples = [s for s in samples if s.sample_id in test_ids]
        if not samples:
            raise EmptyInputError("no samples to evaluate")

        evaluation = evaluate(
            model, samples, noise_variance=options['noise_variance'], rng=np.random.default_rng([self.seed, 7])
        )
        scores = evaluation.scores(model.config)
        report = {'samples': len(samples), 'noise_variance': options['noise_variance'], 'scores': scores}
        path = write_json(report, self.out_dir / 'eval.json')
        spec = ExperimentSpec.from_dict(extra['spec']) if extra.get('spec') else None
        record_run('eval', report, spec=spec, output_path=path, seed=self.seed)
        self.stdout.write(self.style.SUCCESS(f"{scores} -> {path}"))
