"""
Factories for experiment specs with a tiny, fast model.
"""

import factory

from apps.harness.specs import ExperimentSpec

TINY_OVERRIDES = {
    'shared_width': 4,
    'face_hidden': 3,
    'eye_hidden': 3,
    'fixation_hidden': 3,
    'layers': 1,
    'heads': 2,
    'ff_width': 4,
    'batch_size': 4,
    'epochs': 1,
}

TINY_CONFIG_FILE = '\n'.join(f'{key.upper()}={value}' for key, value in TINY_OVERRIDES.items()) + '\n'


class ExperimentSpecFactory(factory.Factory):
    class Meta:
        model = ExperimentSpec

    protocol = 'er3'
    folds = 2
    seed = 0
    model_overrides = factory.LazyFunction(lambda: dict(TINY_OVERRIDES))
