"""
Hyperparameter sweep over the adversarial and task loss weights.
"""

from apps.harness.cli import ExperimentCommand, parse_numbers
from apps.harness.experiments import sweep_hyperparams
from apps.harness.reporting import write_report


class Command(ExperimentCommand):
    help = 'Full factorial sweep over alpha_adv and beta_task'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--alphas', default='0.1,0.3,0.5', help='Adversarial loss weights')
        parser.add_argument('--betas', default='0.01,0.1,1', help='Task loss weights')

    def run(self, **options):
        samples, spec = self.load(options)
        rows = sweep_hyperparams(
            samples, spec,
            alphas=parse_numbers(options['alphas'], 'alphas'),
            betas=parse_numbers(options['betas'], 'betas'),
            **self.run_options(options),
        )
        path = write_report(rows, self.out_dir, 'sweep', title='Hyperparameter sweep')
        best = next(row for row in rows if row.extra.get('best'))
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows, best {best.label} -> {path}"))
