"""
Correlation of eye-movement features with ER and FER classes.
"""

from apps.core.commands import LabCommand
from apps.harness.cli import read_samples
from apps.harness.experiments import correlation_report
from apps.harness.reporting import write_frame


class Command(LabCommand):
    help = 'Pearson, Spearman and Kendall correlation of eye features with each emotion class'

    def add_lab_arguments(self, parser):
        parser.add_argument('--dataset', required=True, help='JSONL dataset')

    def run(self, **options):
        frame = correlation_report(read_samples(options['dataset']))
        path = write_frame(frame, self.out_dir, 'correlation', kind='correlate', seed=self.seed)
        means = frame.groupby('view')[['pearson', 'spearman', 'kendall']].mean()
        self.stdout.write(means.to_string())
        self.stdout.write(self.style.SUCCESS(f"{len(frame)} rows -> {path}"))
