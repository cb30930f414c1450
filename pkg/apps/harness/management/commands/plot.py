"""
Render report CSVs as PNG plots.
"""

import logging
from pathlib import Path

import pandas as pd

from apps.core.commands import LabCommand
from apps.core.exceptions import DataError
from apps.harness.plotting import plot_correlations, plot_modalities, plot_noise

logger = logging.getLogger(__name__)

PLOTS = {
    'noise': ('noise.csv', plot_noise),
    'modalities': ('ablate_modalities.csv', plot_modalities),
    'correlation': ('correlation.csv', plot_correlations),
}


class Command(LabCommand):
    help = 'Plot noise, modality-ablation and correlation reports'

    def add_lab_arguments(self, parser):
        parser.add_argument('--kind', choices=['all', *PLOTS], default='all')
        parser.add_argument('--reports', default=None, help='Directory holding the report CSVs (default: --out)')

    def run(self, **options):
        reports = Path(options['reports']) if options['reports'] else self.out_dir
        kinds = list(PLOTS) if options['kind'] == 'all' else [options['kind']]
        written = []
        for kind in kinds:
            name, plotter = PLOTS[kind]
            source = reports / name
            if not source.is_file():
                logger.warning(f"No {name} in {reports}; skipping the {kind} plot")
                continue
            written.append(plotter(pd.read_csv(source), self.out_dir / f"{kind}.png"))
        if not written:
            raise DataError(f"no report CSVs to plot in {reports}")
        for path in written:
            self.stdout.write(self.style.SUCCESS(f"Saved {path}"))
