"""
Module ablation: baseline, +MAFD, +EMT and the full model.
"""

from apps.harness.cli import ExperimentCommand
from apps.harness.experiments import ablate_modules
from apps.harness.reporting import write_report


class Command(ExperimentCommand):
    help = 'Cross-validate the baseline, +MAFD, +EMT and full model variants'

    def run(self, **options):
        samples, spec = self.load(options)
        rows = ablate_modules(samples, spec, **self.run_options(options))
        path = write_report(rows, self.out_dir, 'ablate_modules', title='Module ablation')
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows -> {path}"))
