"""
Eye-movement feature ablation: gaze point, gaze time, pupil and all channels.
"""

from apps.harness.cli import ExperimentCommand
from apps.harness.experiments import ablate_eye_features
from apps.harness.reporting import write_report


class Command(ExperimentCommand):
    help = 'Cross-validate with only one eye-movement channel group kept'

    def run(self, **options):
        samples, spec = self.load(options)
        rows = ablate_eye_features(samples, spec, **self.run_options(options))
        path = write_report(rows, self.out_dir, 'eye_features', title='Eye feature ablation')
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows -> {path}"))
