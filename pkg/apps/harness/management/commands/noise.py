"""
Robustness to Gaussian test noise.
"""

from apps.harness.cli import ExperimentCommand, parse_numbers
from apps.harness.experiments import noise_robustness
from apps.harness.reporting import write_report


class Command(ExperimentCommand):
    help = 'Score each fold clean and under Gaussian test noise of several variances'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--variances', default='0.01,0.05,0.1', help='Comma-separated noise variances')

    def run(self, **options):
        samples, spec = self.load(options)
        variances = parse_numbers(options['variances'], 'variances')
        rows = noise_robustness(samples, spec, variances=variances, **self.run_options(options))
        path = write_report(rows, self.out_dir, 'noise', title='Noise robustness')
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows -> {path}"))
