"""
Modality ablation: all seven nonempty subsets of face, eye movement and fixation map.
"""

from apps.harness.cli import ExperimentCommand
from apps.harness.experiments import ablate_modalities
from apps.harness.reporting import write_report


class Command(ExperimentCommand):
    help = 'Cross-validate every nonempty modality subset'

    def run(self, **options):
        samples, spec = self.load(options)
        rows = ablate_modalities(samples, spec, **self.run_options(options))
        path = write_report(rows, self.out_dir, 'ablate_modalities', title='Modality ablation')
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows -> {path}"))
