import pytest

from apps.datamodel.io import save_dataset
from apps.datamodel.synthetic import generate_synthetic
from apps.datamodel.types import GapSpec
from apps.emert.tests.helpers import TINY_DIMS

from .factories import TINY_CONFIG_FILE


@pytest.fixture
def tiny_dataset():
    return generate_synthetic(12, GapSpec(seed=0), dims=TINY_DIMS)


@pytest.fixture
def tiny_dataset_path(tmp_path, tiny_dataset):
    path = tmp_path / 'tiny.jsonl'
    save_dataset(tiny_dataset, path)
    return path


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / 'tiny.env'
    path.write_text(TINY_CONFIG_FILE)
    return path
