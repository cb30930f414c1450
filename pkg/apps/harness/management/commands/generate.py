"""
Generate a synthetic multimodal dataset with a controllable emotion gap.
"""

from apps.core.commands import LabCommand
from apps.datamodel.io import save_dataset
from apps.datamodel.synthetic import generate_synthetic
from apps.datamodel.types import GapSpec


class Command(LabCommand):
    help = 'Generate a synthetic JSONL dataset'

    def add_lab_arguments(self, parser):
        parser.add_argument('--n', type=int, default=500, help='Number of samples (default: 500)')
        parser.add_argument('--gap-rate', type=float, default=0.3, help='Probability that FER differs from ER')
        parser.add_argument('--noise-scale', type=float, default=0.8, help='Per-frame noise standard deviation')
        parser.add_argument('--name', default='dataset.jsonl', help='File name under --out')

    def run(self, **options):
        samples = generate_synthetic(
            options['n'],
            GapSpec(gap_rate=options['gap_rate'], seed=self.seed),
            noise_scale=options['noise_scale'],
        )
        path = self.out_dir / options['name']
        save_dataset(samples, path)
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(samples)} samples to {path}"))
