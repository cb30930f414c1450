"""
Single-task against multi-task training for the ER and FER protocols.
"""

from apps.harness.cli import ExperimentCommand, parse_numbers
from apps.harness.experiments import compare_multitask, multitask_summary
from apps.harness.reporting import write_report


class Command(ExperimentCommand):
    help = 'Compare single-task and multi-task training over several seeds'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--seeds', default='0,1,2', help='Comma-separated seeds')

    def run(self, **options):
        samples, spec = self.load(options)
        seeds = parse_numbers(options['seeds'], 'seeds', cast=int)
        rows = compare_multitask(samples, spec, seeds=seeds, **self.run_options(options))
        path = write_report(rows, self.out_dir, 'multitask', title='Single-task vs multi-task')
        summary = multitask_summary(rows)
        summary.to_csv(self.out_dir / 'multitask_summary.csv', index=False)
        self.stdout.write(summary.to_string(index=False))
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows -> {path}"))
