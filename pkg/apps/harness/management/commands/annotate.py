"""
Fuse machine and expert annotations with the ALA pipeline.
"""

import pandas as pd

from apps.ala.io import load_bundles, save_bundles
from apps.ala.services import run_ala
from apps.ala.sources import get_machine_labeler, simulate_bundles
from apps.core.commands import LabCommand
from apps.core.exceptions import ConfigError
from apps.harness.cli import read_samples
from apps.harness.reporting import record_run, write_json


class Command(LabCommand):
    help = 'Run active-learning annotation fusion over simulated or stored annotation bundles'

    def add_lab_arguments(self, parser):
        parser.add_argument('--dataset', default=None, help='Dataset to simulate annotations for')
        parser.add_argument('--bundles', default=None, help='Stored annotation bundles (JSONL) instead of simulating')
        parser.add_argument('--experts', type=int, default=4, help='Simulated expert panel size (default: 4)')
        parser.add_argument('--granularity', choices=['fine', 'coarse'], default='fine')
        parser.add_argument('--experts-on-all', action='store_true', help='Experts annotate every item')

    def run(self, **options):
        if options['bundles']:
            bundles, er_labels = load_bundles(options['bundles'])
        elif options['dataset']:
            samples = read_samples(options['dataset'])
            bundles, er_labels = simulate_bundles(
                samples,
                n_experts=options['experts'],
                machine=get_machine_labeler(),
                granularity=options['granularity'],
                experts_on_all=options['experts_on_all'],
                seed=self.seed,
            )
            save_bundles(bundles, self.out_dir / 'bundles.jsonl', er_labels)
        else:
            raise ConfigError("annotate needs --dataset or --bundles")

        result = run_ala(bundles, er_labels)
        report = result.to_dict()
        write_json(report, self.out_dir / 'ala.json')
        pd.DataFrame(result.consistency).to_csv(self.out_dir / 'annotation_consistency.csv', index=False)
        record_run('annotate', report, seed=self.seed, output_path=self.out_dir / 'ala.json')
        self.stdout.write(self.style.SUCCESS(
            f"Fused {len(result.fused)} items ({len(result.contested)} contested) into {self.out_dir / 'ala.json'}"
        ))
