"""
Shared argument handling for the experiment commands.
"""

import logging
from pathlib import Path
from typing import List, Tuple

from django.conf import settings

from apps.core.commands import LabCommand
from apps.core.exceptions import ConfigError, DataError
from apps.datamodel.io import load_dataset
from apps.datamodel.types import MultimodalSample
from .serializers import build_spec
from .specs import ExperimentSpec

logger = logging.getLogger(__name__)


def parse_numbers(text: str, name: str, cast=float) -> List:
    """Parse '0.1,0.3' into numbers; raises ConfigError on bad input."""
    try:
        return [cast(item) for item in text.split(',') if item.strip()]
    except ValueError as exc:
        raise ConfigError(f"--{name} expects comma-separated numbers, got '{text}'") from exc


def read_samples(path) -> List[MultimodalSample]:
    if not path:
        raise ConfigError("--dataset is required")
    if not Path(path).is_file():
        raise DataError(f"dataset not found: {path}", details={'path': str(path)})
    return load_dataset(path)


class ExperimentCommand(LabCommand):
    """
    Adds --dataset and the experiment-spec flags; subclasses implement
    add_experiment_arguments() and run().
    """

    def add_lab_arguments(self, parser):
        parser.add_argument('--dataset', required=True, help='JSONL dataset written by generate')
        parser.add_argument('--protocol', default=None, help='er3, er7, fer3, fer7, er_va, fer_va or fer_intensity')
        parser.add_argument('--modalities', default=None, help='Kept modalities, e.g. F,E,G')
        parser.add_argument('--modules', default=None, help="Enabled modules, e.g. MAFD,EMT or 'baseline'")
        parser.add_argument('--noise-variance', type=float, default=None, help='Test-time Gaussian noise variance')
        parser.add_argument('--alpha', type=float, default=None, help='Adversarial loss weight')
        parser.add_argument('--beta', type=float, default=None, help='Task loss weight')
        parser.add_argument('--folds', type=int, default=None, help='Cross-validation folds (default: LAB_FOLDS)')
        parser.add_argument('--single-task', action='store_true', help='Train only the scored head')
        parser.add_argument('--eye-groups', default=None, help='Kept eye channel groups, e.g. gaze_point,pupil')
        parser.add_argument('--executor', default=None, help='serial, threads or celery (default: LAB_EXECUTOR)')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def load(self, options) -> Tuple[List[MultimodalSample], ExperimentSpec]:
        modules = options.get('modules')
        if modules is not None and modules.strip().lower() in ('baseline', 'none'):
            modules = ''
        folds = options.get('folds')
        if folds is None and 'folds' not in self.file_settings:
            folds = settings.LAB_FOLDS
        spec = build_spec(
            self.file_settings,
            protocol=options.get('protocol'),
            modality_mask=options.get('modalities'),
            module_mask=modules,
            noise_variance=options.get('noise_variance'),
            alpha_adv=options.get('alpha'),
            beta_task=options.get('beta'),
            folds=folds,
            seed=self.seed,
            multitask=False if options.get('single_task') else None,
            eye_groups=options.get('eye_groups'),
        )
        samples = read_samples(options.get('dataset'))
        logger.info(f"Loaded {len(samples)} samples for {spec.key()}")
        return samples, spec

    def run_options(self, options) -> dict:
        return {
            'executor': options.get('executor') or self.file_settings.get('executor'),
            'threads': self.threads,
            'dataset_path': options.get('dataset'),
        }
