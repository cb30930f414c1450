"""
Cross-validate one experiment spec.
"""

from apps.harness.cli import ExperimentCommand
from apps.harness.reporting import write_report
from apps.harness.runner import run_cv


class Command(ExperimentCommand):
    help = 'K-fold cross-validation of one experiment spec'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--probe', action='store_true', help='Probe F_C/F_P decoupling on each held-out fold')

    def run(self, **options):
        samples, spec = self.load(options)
        row = run_cv(spec, samples, probe=options['probe'], **self.run_options(options))
        path = write_report([row], self.out_dir, 'cv', kind='cv', title=f'Cross-validation ({spec.protocol})')
        self.stdout.write(self.style.SUCCESS(f"{row.label}: {row.mean} -> {path}"))
