import pytest

from apps.datamodel.synthetic import generate_synthetic
from apps.datamodel.types import GapSpec

from .helpers import TINY_DIMS


@pytest.fixture
def tiny_samples():
    return generate_synthetic(8, GapSpec(seed=0), dims=TINY_DIMS)
