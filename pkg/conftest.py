"""
Shared pytest fixtures.
"""

import logging

import pytest


@pytest.fixture(autouse=True)
def propagate_app_logs():
    """Let caplog see records from the 'apps' logger, which does not propagate in settings."""
    app_logger = logging.getLogger('apps')
    previous = app_logger.propagate
    app_logger.propagate = True
    yield
    app_logger.propagate = previous


@pytest.fixture
def lab_output(tmp_path, settings):
    settings.LAB_OUTPUT_DIR = str(tmp_path / 'out')
    settings.LAB_RECORD_RUNS = False
    return tmp_path / 'out'
